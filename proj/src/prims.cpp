#include "effcore/prims.hpp"

namespace effcore {

TypePtr tBool() {
    static TypePtr t = tBase("bool");
    return t;
}
TypePtr tInt4() {
    static TypePtr t = tBase("int4");
    return t;
}

std::optional<int> baseCarrierSize(const std::string& base) {
    if (base == "bool") return 2;
    if (base == "int4") return 4;
    return std::nullopt;
}

std::string baseElementName(const std::string& base, int index) {
    if (base == "bool") return index == 0 ? "false" : "true";
    if (base == "int4") return std::to_string(index);
    return base + "#" + std::to_string(index);
}

namespace {

int evFalse(const std::vector<int>&) { return 0; }
int evTrue(const std::vector<int>&) { return 1; }
int evNot(const std::vector<int>& a) { return a[0] ? 0 : 1; }
int evAnd(const std::vector<int>& a) { return a[0] && a[1] ? 1 : 0; }
int evOr(const std::vector<int>& a) { return a[0] || a[1] ? 1 : 0; }
int evI0(const std::vector<int>&) { return 0; }
int evI1(const std::vector<int>&) { return 1; }
int evI2(const std::vector<int>&) { return 2; }
int evI3(const std::vector<int>&) { return 3; }
int evAdd4(const std::vector<int>& a) { return (a[0] + a[1]) & 3; }
int evEq4(const std::vector<int>& a) { return a[0] == a[1] ? 1 : 0; }

std::vector<PrimInfo> makeTable() {
    TypePtr b = tBool();
    TypePtr i = tInt4();
    return {
        {"false", {}, b, evFalse}, {"true", {}, b, evTrue},   {"not", {b}, b, evNot},
        {"and", {b, b}, b, evAnd}, {"or", {b, b}, b, evOr},   {"i0", {}, i, evI0},
        {"i1", {}, i, evI1},       {"i2", {}, i, evI2},       {"i3", {}, i, evI3},
        {"add4", {i, i}, i, evAdd4}, {"eq4", {i, i}, b, evEq4},
    };
}

}  // namespace

const std::vector<PrimInfo>& allPrims() {
    static std::vector<PrimInfo> table = makeTable();
    return table;
}

const PrimInfo* findPrim(const std::string& name) {
    for (const auto& p : allPrims())
        if (p.name == name) return &p;
    return nullptr;
}

ValuePtr vBool(bool b) { return vPrim(b ? "true" : "false"); }
ValuePtr vInt4(int k) { return vPrim("i" + std::to_string(k & 3)); }

}  // namespace effcore
