//
// PocketFlow - Copyright 2026 The PocketFlow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <stdexcept>
#include <string>

namespace pocketflow {

/// Root of every error thrown by the library. The category drives the CLI exit
/// code: data errors map to 2, numeric failures to 3.
class Error : public std::runtime_error {
public:
  enum class Category { kData, kNumeric, kUsage };

  Error(Category category, const std::string &what)
      : std::runtime_error(what), category_(category) { }

  Category category() const noexcept { return category_; }

private:
  Category category_;
};

#define POCKETFLOW_DEFINE_ERROR(Name, Cat)                                     \
  class Name : public Error {                                                  \
  public:                                                                      \
    explicit Name(const std::string &what)                                     \
        : Error(Error::Category::Cat, what) { }                                \
  }

POCKETFLOW_DEFINE_ERROR(VocabularyError, kData);
POCKETFLOW_DEFINE_ERROR(ClashError, kData);
POCKETFLOW_DEFINE_ERROR(ParseError, kData);
POCKETFLOW_DEFINE_ERROR(RangeError, kData);
POCKETFLOW_DEFINE_ERROR(LookupError, kData);
POCKETFLOW_DEFINE_ERROR(DataError, kData);
POCKETFLOW_DEFINE_ERROR(InputError, kData);
POCKETFLOW_DEFINE_ERROR(ShapeError, kNumeric);
POCKETFLOW_DEFINE_ERROR(TransformError, kNumeric);
POCKETFLOW_DEFINE_ERROR(NumericError, kNumeric);
POCKETFLOW_DEFINE_ERROR(ConfigError, kUsage);

#undef POCKETFLOW_DEFINE_ERROR

} // namespace pocketflow
