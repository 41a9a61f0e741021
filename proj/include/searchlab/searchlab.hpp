/*
 * Copyright (c) 2026, The searchlab Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include "searchlab/core_search.hpp"
#include "searchlab/pinned_search.hpp"
#include "searchlab/kary_index.hpp"
#include "searchlab/batch_engine.hpp"
#include "searchlab/access_trace.hpp"
#include "searchlab/workload.hpp"
#include "searchlab/bench.hpp"
#include "searchlab/verify.hpp"
