#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gaitforge/model.hpp"

namespace gaitforge {

// Morphology config documents are JSON with a mandatory "schema_version".
// Serialisation is canonical: keys sorted, doubles printed round-trip exact.
std::string serialize_spec(const MorphologySpec& spec, int indent = 2);

// Throws kSchemaMismatch for a wrong/missing version and kValidation listing
// every missing field or violated invariant.
MorphologySpec parse_spec(std::string_view text,
                          const std::vector<std::string>& overrides = {});

}  // namespace gaitforge
