#pragma once

// On-disk dataset format: one JSON header line (alphabet, horizon, metadata)
// followed by one JSON array per episode, each element {a, o:[...], r}.

#include <iosfwd>
#include <string>

#include "rdpforge/alphabet.hpp"

namespace rdpforge {

void save_dataset(const Dataset& dataset, std::ostream& out);
void save_dataset(const Dataset& dataset, const std::string& path);

Dataset load_dataset(std::istream& in);
Dataset load_dataset(const std::string& path);

}  // namespace rdpforge
