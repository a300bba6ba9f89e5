// SPDX-License-Identifier: Apache-2.0
//
// agingmimo: pilot spacing analysis for MU-MIMO uplink over aging channels
// Copyright (C) 2026 The agingmimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef AGINGMIMO_ERRORS_HPP
#define AGINGMIMO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace agingmimo
{
    // Raised when a Hermitian solve meets a matrix whose condition number exceeds the guard,
    // or when a computation produces non-finite entries.
    class IllConditionedError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Fixed-point iteration did not reach the requested tolerance.
    class ConvergenceError : public std::runtime_error
    {
    public:
        ConvergenceError(const std::string &what, int iterations, double residual)
            : std::runtime_error(what), iterations_(iterations), residual_(residual) {}

        int iterations() const noexcept { return iterations_; }
        double residual() const noexcept { return residual_; }

    private:
        int iterations_;
        double residual_;
    };

    // The SINR / SE upper bound is undefined for the given scenario (static channel, or a
    // literal-mode interference floor that is not positive definite).
    class BoundUnavailableError : public std::domain_error
    {
    public:
        using std::domain_error::domain_error;
    };

    // Bracketing search hit its frame-size ceiling without crossing the target.
    class SearchCeilingError : public std::runtime_error
    {
    public:
        SearchCeilingError(const std::string &what, long ceiling)
            : std::runtime_error(what), ceiling_(ceiling) {}

        long ceiling() const noexcept { return ceiling_; }

    private:
        long ceiling_;
    };

    // Configuration parse or validation failure; `field()` carries the JSON path of the offending entry.
    class ConfigError : public std::runtime_error
    {
    public:
        ConfigError(const std::string &field, const std::string &message)
            : std::runtime_error(field.empty() ? message : field + ": " + message), field_(field) {}

        const std::string &field() const noexcept { return field_; }

    private:
        std::string field_;
    };
}

#endif
