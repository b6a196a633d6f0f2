// Copyright 2026 The qfedsim Authors.
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
#include "error.hpp"

namespace qfed {

const char *to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidGate: return "invalid gate";
    case ErrorCode::InvalidCircuit: return "invalid circuit";
    case ErrorCode::Shape: return "shape mismatch";
    case ErrorCode::InvalidShots: return "invalid shot count";
    case ErrorCode::Domain: return "domain error";
    case ErrorCode::Config: return "config error";
    case ErrorCode::CalibrationFormat: return "calibration format error";
    case ErrorCode::DataFormat: return "data format error";
    case ErrorCode::Aggregation: return "aggregation error";
    case ErrorCode::Round: return "round error";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::Usage: return "usage error";
    }
    return "unknown error";
}

} // namespace qfed
