// SPDX-License-Identifier: Apache-2.0
//
// astars: active STAR-RIS ISAC link-level simulator and optimizer
// Copyright (C) 2026 The astars authors
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

#pragma once

#include "astars/linalg.hpp"
#include "astars/rng.hpp"
#include "astars/scenario.hpp"
#include "astars/channel.hpp"
#include "astars/surface.hpp"
#include "astars/signal.hpp"
#include "astars/sdp.hpp"
#include "astars/beamform.hpp"
#include "astars/phase_opt.hpp"
#include "astars/ofdm.hpp"
#include "astars/sensing.hpp"
#include "astars/config_io.hpp"
#include "astars/algorithm.hpp"
#include "astars/experiments.hpp"
#include "astars/log.hpp"
