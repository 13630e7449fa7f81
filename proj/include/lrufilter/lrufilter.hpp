// Copyright 2026 The lrufilter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include "lrufilter/common.hpp"
#include "lrufilter/config.hpp"
#include "lrufilter/control.hpp"
#include "lrufilter/device.hpp"
#include "lrufilter/dynamics.hpp"
#include "lrufilter/filter_synth.hpp"
#include "lrufilter/fitting.hpp"
#include "lrufilter/integrator.hpp"
#include "lrufilter/lru_harness.hpp"
#include "lrufilter/rates.hpp"
#include "lrufilter/transmon_hilbert.hpp"
