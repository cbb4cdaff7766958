#pragma once

#include <optional>
#include <string>
#include <vector>

#include "effcore/ast.hpp"

namespace effcore {

// Finite base types and primitive operations. The shipped set keeps every
// carrier small: `bool` (false, true) and `int4` (0..3, arithmetic mod 4).
// Constants are zero-argument primitives.

struct PrimInfo {
    std::string name;
    std::vector<TypePtr> arg_types;
    TypePtr result;
    // Evaluation over carrier element indices (canonical enumeration order).
    int (*eval)(const std::vector<int>&);
};

// Carrier size of a base type, or nullopt for unknown bases.
std::optional<int> baseCarrierSize(const std::string& base);

// Printed form of element `index` of a base carrier ("true", "2", ...).
std::string baseElementName(const std::string& base, int index);

const PrimInfo* findPrim(const std::string& name);
const std::vector<PrimInfo>& allPrims();

TypePtr tBool();
TypePtr tInt4();

ValuePtr vBool(bool b);
ValuePtr vInt4(int k);

}  // namespace effcore
