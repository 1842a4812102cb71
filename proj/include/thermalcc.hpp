/*
 * Copyright 2026 The thermalcc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "thermalcc/calibration.hpp"
#include "thermalcc/chanstack.hpp"
#include "thermalcc/config.hpp"
#include "thermalcc/csv.hpp"
#include "thermalcc/errors.hpp"
#include "thermalcc/fingerprint.hpp"
#include "thermalcc/harness.hpp"
#include "thermalcc/partitioning.hpp"
#include "thermalcc/sensor.hpp"
#include "thermalcc/thermal_model.hpp"
