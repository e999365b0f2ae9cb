#include "doctest.h"

#include "bianchi/pipeline.hpp"

using namespace bianchi;

namespace {

IQInt w(long a, long b) { return IQInt(a, b); }

long cell(DimensionTable& T, const Ideal& D, int c1, int c2) {
    long v = 0;
    for (auto& o : T.orbits())
        if (o.c1 == c1 && o.c2 == c2 && o.conductor.divides(D)) v += T.dims(D, o).new_full * o.size;
    return v;
}

}  // namespace

TEST_CASE("boldface eligibility") {
    CHECK(eligible_cell(1, 0, 0, 0, true));
    CHECK(eligible_cell(2, 1, 2, 0, true));
    CHECK(!eligible_cell(2, 1, 2, 0, false));
    CHECK(!eligible_cell(0, 0, 0, 0, true));
    CHECK(!eligible_cell(2, 0, 0, 0, true));
    CHECK(!eligible_cell(2, 1, 1, 1, true));
    CHECK(!eligible_cell(1, 0, 0, 0, true, 2));
}

TEST_CASE("labels of levels and conductors") {
    DimensionTable T(Ideal(w(3, -2)), 3, 2);
    CHECK(T.p_label(0, 0) == "1");
    CHECK(T.p_label(1, 1) == "3");
    CHECK(T.p_label(2, 1) == "3π");
    CHECK(T.p_label(0, 2) == "π̄²");
    CHECK(T.p_label(2, 2) == "9");
    Ideal N(w(3, -2));
    CHECK(T.level_label(Ideal(w(3, -2) * w(1, 1)), N) == "Γ₀(N)∩Γ₁(π)");
    CHECK(T.level_label(Ideal(w(9, 0)), N) == "Γ₁(9)");
    CHECK(T.level_label(N, N) == "Γ₀(N)");
    CHECK(T.tame_part(Ideal(w(3, -2) * w(3, 0))) == N);
    // Galois orbits of characters of (O/9)^* = C6 x C6, i.e. its cyclic subgroups
    CHECK(T.orbits().size() == 20);
}

TEST_CASE("new dimensions over N p for N = 3-2w") {
    DimensionTable T(Ideal(w(3, -2)), 3, 1);
    IQInt N = w(3, -2), pi = w(1, 1), pib = w(1, -1);
    CHECK(cell(T, Ideal(N * pi), 0, 0) == 1);
    CHECK(cell(T, Ideal(N * pib), 0, 0) == 0);
    CHECK(cell(T, Ideal(N * pi * pib), 0, 0) == 0);
    CHECK(cell(T, Ideal(N * pi * pib), 1, 1) == 0);
    // the ledger never holds a negative new dimension and every row is consistent
    for (auto& r : T.ledger().rows()) {
        CHECK(r.new_ >= 0);
        CHECK(r.new_ + r.old == r.cusp);
    }
}

TEST_CASE("weight probe") {
    CHECK(weight_probe(Ideal(w(6, -1)), {2}).zero_at == 2);
    CHECK(weight_probe(Ideal(w(3, -2)), {2}).zero_at == 2);
    auto b = weight_probe(Ideal(w(0, 2)), {2});
    CHECK(!b.zero_at);
    CHECK(b.cusp_dims[0].second > 0);
}

TEST_CASE("newform census at 7+w and 11+2w") {
    auto C = newform_census(w(7, 1), 3);
    CHECK(C.plus == 1);
    CHECK(C.minus == 0);
    REQUIRE(C.forms.size() == 1);
    CHECK(C.forms[0].rational);
    CHECK(C.forms[0].ordinary == Ordinarity::Ordinary);
    auto D = newform_census(w(11, 2), 3);
    CHECK(D.plus == 0);
    CHECK(D.minus == 2);
    CHECK(D.forms.size() == 2);
}

TEST_CASE("seed data for the 3-2w family") {
    auto fams = example_families();
    REQUIRE(fams.size() == 4);
    auto s = seed_data(fams[0]);
    CHECK(s.dim == 1);
    CHECK(s.a.at(w(3, 2).canonical().str()) == -6);
    CHECK(s.a.at(w(0, 1).canonical().str()) == -2);
    CHECK(s.ordinarity.verdict == Ordinarity::Ordinary);
}

TEST_CASE("J-sign elimination for tame level 3-w") {
    auto fams = example_families();
    const FamilySpec& f = fams[1];
    auto s = seed_data(f);
    REQUIRE(s.dim == 1);
    auto r = depth_scan(f, s, 1);
    CHECK(r.complete);
    CHECK(r.survivors == 0);
    int jsign = 0;
    for (auto& c : r.candidates)
        if (c.status == "eliminated: J-sign") {
            ++jsign;
            CHECK(c.cond_label == "π²");
            CHECK(c.orbit * c.dims.new_minus == 2);
        }
    CHECK(jsign == 1);
}
