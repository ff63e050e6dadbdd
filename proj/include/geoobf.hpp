// Copyright 2026 The geoobf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef GEOOBF_GEOOBF_HPP_
#define GEOOBF_GEOOBF_HPP_

#include "geoobf/adversary.hpp"
#include "geoobf/domain.hpp"
#include "geoobf/errors.hpp"
#include "geoobf/harness.hpp"
#include "geoobf/hilbert.hpp"
#include "geoobf/mechanism.hpp"
#include "geoobf/partition.hpp"
#include "geoobf/partition_hilbert.hpp"
#include "geoobf/qkmeans.hpp"
#include "geoobf/rng.hpp"

#endif  // GEOOBF_GEOOBF_HPP_
