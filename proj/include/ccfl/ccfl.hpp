/*
 * Copyright 2026 The Crosscloud FL Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include "ccfl/config.hpp"
#include "ccfl/data.hpp"
#include "ccfl/dp.hpp"
#include "ccfl/error.hpp"
#include "ccfl/features.hpp"
#include "ccfl/federation.hpp"
#include "ccfl/membership.hpp"
#include "ccfl/model.hpp"
#include "ccfl/paillier.hpp"
#include "ccfl/random.hpp"
#include "ccfl/secure_agg.hpp"
#include "ccfl/smc.hpp"
#include "ccfl/sweep.hpp"
