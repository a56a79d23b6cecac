/**
 * Copyright 2026 The earcough Authors
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


#ifndef EARCOUGH_NN_HPP_
#define EARCOUGH_NN_HPP_

#include "earcough/nn/layers.hpp"
#include "earcough/nn/model.hpp"
#include "earcough/nn/params.hpp"
#include "earcough/nn/profile.hpp"
#include "earcough/nn/serialize.hpp"
#include "earcough/nn/spec.hpp"

#endif  // EARCOUGH_NN_HPP_
