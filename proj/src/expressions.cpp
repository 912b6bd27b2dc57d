#include "vcone/expressions.hpp"

#include <cmath>
#include <fstream>

#include "vcone/error.hpp"

namespace vcone {

namespace {

// Numerators over 360, indexed like a 4-party Behavior table.  Entries with
// z = 0 carry the ABD part and entries with y = 0 (z = 1) the ACD part; the
// constant offset 13/24 per setting row is folded into the z = 0 block.
const int kSNumerators[256] = {
      213,   993,   -23,  -217,  -228,   234,     0,     0,   345,   429,   -37,   157,   270,   384,     0,     0,
       33,  -879,   -77,    71,   222,  -198,     0,     0,   165,   141,    17,  -131,   180,    96,     0,     0,
     -715,  -383,  -247,     7,  -228,   234,     0,     0,   121,    77,   187,   -67,   270,   384,     0,     0,
      257,    49,   -13,  -281,   222,  -198,     0,     0,   229,   365,   -47,   221,   180,    96,     0,     0,
      565,   353,   -23,  -217,   348,   -54,     0,     0,   569,   493,   -37,   157,   270,    96,     0,     0,
      -47,   -79,   -77,    71,    78,   378,     0,     0,   101,   205,    17,  -131,   180,   384,     0,     0,
     -363, -1023,  -247,     7,   348,   -54,     0,     0,   345,   141,   187,   -67,   270,    96,     0,     0,
      177,   849,   -13,  -281,    78,   378,     0,     0,   165,   429,   -47,   221,   180,   384,     0,     0,
      345,   141,   187,   -67,   270,    96,     0,     0,   213,   561,   329,  -569,  -228,  -198,     0,     0,
      165,   429,   -47,   221,   180,   384,     0,     0,    33,  -447,  -157,   583,   222,   234,     0,     0,
      569,   493,   -37,   157,   270,    96,     0,     0,   -11,   209,  -599,   359,  -228,  -198,     0,     0,
      101,   205,    17,  -131,   180,   384,     0,     0,    97,  -223,    67,  -793,   222,   234,     0,     0,
      121,    77,   187,   -67,   270,   384,     0,     0,  -139,  -239,   329,  -569,   348,   378,     0,     0,
      229,   365,   -47,   221,   180,    96,     0,     0,   113,   193,  -157,   583,    78,   -54,     0,     0,
      345,   429,   -37,   157,   270,   384,     0,     0,  -363,  -591,  -599,   359,   348,   378,     0,     0,
      165,   141,    17,  -131,   180,    96,     0,     0,   177,   417,    67,  -793,    78,   -54,     0,     0

};

}  // namespace

BellExpression expression_S() {
    std::vector<mpq_class> coefs;
    for (int v : kSNumerators) {
        mpq_class q(v, 360);
        q.canonicalize();
        coefs.push_back(q);
    }
    auto e = BellExpression::from_exact("S", 4, std::move(coefs));
    e.classical_bound = 7.0;
    e.quantum_target = 7.2;
    return e;
}

BellExpression expression_chsh() {
    std::vector<mpq_class> coefs(16);
    for (unsigned a = 0; a < 2; ++a)
        for (unsigned b = 0; b < 2; ++b)
            for (unsigned x = 0; x < 2; ++x)
                for (unsigned y = 0; y < 2; ++y)
                    coefs[Behavior::index(2, (a << 1) | b, (x << 1) | y)] = ((a + b + x * y) % 2) ? -1 : 1;
    auto e = BellExpression::from_exact("chsh", 2, std::move(coefs));
    e.classical_bound = 2.0;
    e.quantum_target = 2.0 * std::sqrt(2.0);
    return e;
}

BellExpression expression_abcd() {
    std::vector<mpq_class> coefs(256);
    for (unsigned o = 0; o < 16; ++o)
        for (unsigned s = 0; s < 16; ++s) {
            const unsigned parity = __builtin_popcount(o) + (((s >> 2) & 1) & ((s >> 1) & 1));
            coefs[Behavior::index(4, o, s)] = (parity % 2) ? -1 : 1;
        }
    return BellExpression::from_exact("abcd", 4, std::move(coefs));
}

BellExpression expression_by_name(const std::string& name) {
    if (name == "S") return expression_S();
    if (name == "chsh" || name == "CHSH") return expression_chsh();
    if (name == "abcd") return expression_abcd();
    std::ifstream in(name);
    if (!in) throw invalid_input("unknown expression or unreadable file: " + name);
    try {
        return expression_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& ex) {
        throw invalid_input(std::string("cannot parse expression file: ") + ex.what());
    }
}

}  // namespace vcone
