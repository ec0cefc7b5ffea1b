#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "klish/types.hpp"

namespace klish {

using Json = nlohmann::ordered_json;

// JSON encoding of the domain types. Keys are emitted in declaration order
// and doubles in shortest round-trip form, so decode(encode(x)) == x bitwise.

void to_json(Json& j, const LinearClassifier& c);
void from_json(const Json& j, LinearClassifier& c);
void to_json(Json& j, const ClusterAssignment& a);
void from_json(const Json& j, ClusterAssignment& a);
void to_json(Json& j, const FilterReport& r);
void from_json(const Json& j, FilterReport& r);
void to_json(Json& j, const MergeRecord& r);
void from_json(const Json& j, MergeRecord& r);
void to_json(Json& j, const MergeHistory& h);
void from_json(const Json& j, MergeHistory& h);
void to_json(Json& j, const RunConfig& c);
void from_json(const Json& j, RunConfig& c);

/// Writes `j` followed by a newline. Throws IoError.
void write_json_file(const std::filesystem::path& path, const Json& j, int indent = -1);
/// Throws IoError on open or parse failure.
Json read_json_file(const std::filesystem::path& path);

}  // namespace klish
