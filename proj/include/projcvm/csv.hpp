#pragma once

#include <string>

#include "projcvm/types.hpp"

namespace projcvm {

// Numeric CSV: rows are observations, columns coordinates, comma separated,
// locale-independent parsing. Throws DataError on anything malformed.
SampleMatrix read_csv(const std::string& path, bool header = false);

void write_csv(const std::string& path, const SampleMatrix& data);

}  // namespace projcvm
