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

#ifndef AGINGMIMO_AGINGMIMO_HPP
#define AGINGMIMO_AGINGMIMO_HPP

#include "bounds.hpp"
#include "channel_model.hpp"
#include "errors.hpp"
#include "linalg.hpp"
#include "optimizer.hpp"
#include "pilot_estimation.hpp"
#include "sinr.hpp"

#endif
