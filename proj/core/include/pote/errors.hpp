/**
 * Copyright PoTE simulator contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <stdexcept>
#include <string>

namespace pote {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define POTE_DEFINE_ERROR(Name)                              \
  class Name : public Error {                                \
   public:                                                   \
    explicit Name(const std::string& what) : Error(what) {}  \
  }

// codec
POTE_DEFINE_ERROR(MalformedEncoding);
POTE_DEFINE_ERROR(VariableFieldTooLong);

// attestation
POTE_DEFINE_ERROR(RegistryFull);
POTE_DEFINE_ERROR(UnknownVendor);
POTE_DEFINE_ERROR(MeasurementRejected);

// selection
POTE_DEFINE_ERROR(EmptyRoster);

// validation
POTE_DEFINE_ERROR(CommitmentMismatch);
POTE_DEFINE_ERROR(InvalidQuote);
POTE_DEFINE_ERROR(NotFinalized);
POTE_DEFINE_ERROR(AlreadyFinalized);
POTE_DEFINE_ERROR(StateTransitionMismatch);

// simnet / harness
POTE_DEFINE_ERROR(ConfigInvalid);

#undef POTE_DEFINE_ERROR

}  // namespace pote
