/*
 * Copyright 2026 The QCAD Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef QCAD_CORE_ERROR_HPP_
#define QCAD_CORE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace qcad {

// Base of every exception thrown by the core library. The C API maps each
// subclass onto a stable status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller-supplied parameter is out of its documented range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Input data is malformed or inconsistent with its schema.
class DataError : public Error {
 public:
  using Error::Error;
};

// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// An evaluation metric is undefined for the given labels.
class MetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace qcad

#endif  // QCAD_CORE_ERROR_HPP_
