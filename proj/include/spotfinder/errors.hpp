/* Copyright 2026 The Spotfinder Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */
#pragma once

#include <stdexcept>
#include <string>

namespace spotfinder
{

/// Base of every exception thrown by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// A value violated an operation's precondition (bad latitude, wrong raster size, ...).
class DomainError : public Error
{
public:
  using Error::Error;
};

/// Transient failure; the same request may succeed later.
class RetryableError : public Error
{
public:
  using Error::Error;
};

/// Quota, credential or storage failure. A survey aborts on these.
class FatalError : public Error
{
public:
  using Error::Error;
};

/// A detector backend failed or produced output outside the contract.
class BackendError : public Error
{
public:
  using Error::Error;
};

class NotFoundError : public Error
{
public:
  using Error::Error;
};

/// Attempt to modify a record whose verdict is already final.
class ImmutableRecordError : public Error
{
public:
  using Error::Error;
};

class ConfigError : public Error
{
public:
  using Error::Error;
};

}  // namespace spotfinder
