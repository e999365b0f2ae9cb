#include "doctest.h"

#include "bianchi/dimension_formulas.hpp"

using namespace bianchi;

namespace {
const IQInt pi(1, 1), pib(1, -1);
}

TEST_CASE("lambda cases") {
    CHECK(lambda(1, 0, 3) == 2);
    CHECK(lambda(2, 0, 3) == 4);
    CHECK(lambda(2, 2, 3) == 2);
    CHECK(lambda(3, 1, 3) == 6);
    CHECK(lambda(3, 2, 3) == 6);
    CHECK(lambda(4, 0, 2) == 6);
    CHECK_THROWS(lambda(0, 0, 3));
    CHECK_THROWS(lambda(1, 2, 3));
}

TEST_CASE("ideal enumeration") {
    auto I = ideals_up_to(20);
    // norms 1,2,3,3,4,6,6,8,9,9,9,11,11,12,12,16,17,17,18,18,18,19,19
    CHECK(I.size() == 23);
    CHECK(I[0].is_unit());
    for (size_t i = 1; i < I.size(); ++i) CHECK(I[i - 1].norm() <= I[i].norm());
}

TEST_CASE("cusp counts") {
    Modulus P{Ideal(pi)};
    CHECK(cusp_count(P, subgroup_full(P)) == 2);
    Modulus N(Ideal(IQInt(7, 1)));
    CHECK(cusp_count(N, subgroup_full(N)) == 4);
    CHECK(cusp_count_brute(N, subgroup_full(N)) == 4);
    Modulus T(Ideal(IQInt(3)));
    // -1 fixes every cusp, so Gamma_1(3) has as many cusps as Gamma_{+-1}(3)
    CHECK(cusp_count(T, subgroup_trivial(T)) == 8);
    CHECK(cusp_count_brute(T, subgroup_trivial(T)) == 8);
    CHECK(cusp_count_brute(T, subgroup_pm1(T)) == 8);
    // the closed form with the unit-index prefactor does not count cusps
    CHECK(cusp_count_prefactor(N, subgroup_full(N)) != mpq_class(4));
    CHECK_THROWS(cusp_count(T, {T.ring().index(IQInt(1, 1))}));
}

TEST_CASE("divisor sum matches orbit enumeration up to norm 60") {
    for (const Ideal& I : ideals_up_to(60)) {
        if (I.is_unit()) continue;
        Modulus M(I);
        std::vector<std::vector<long>> Hs = {subgroup_full(M), subgroup_pm1(M), subgroup_trivial(M)};
        auto chars = M.characters();
        Hs.push_back(subgroup_kernel(chars.back()));
        for (auto& H : Hs) {
            INFO(I.str());
            CHECK(cusp_count(M, H) == cusp_count_brute(M, H));
        }
    }
}

TEST_CASE("Eisenstein dimension: both forms agree") {
    for (const Ideal& I : ideals_up_to(200)) {
        if (I.is_unit()) continue;
        for (const Ideal& f : I.divisors())
            for (int k : {0, 1, 2}) CHECK(eisenstein_sum(I, f, k) == eisenstein_product(I, f, k));
    }
    Modulus N(Ideal(IQInt(7, 1)));
    DirichletChar triv(&N, std::vector<int>(N.ngens(), 0));
    CHECK(eisenstein_dim(triv, 0) == 3);
    Modulus P{Ideal(pi)};
    CHECK(eisenstein_dim(DirichletChar(&P, std::vector<int>(P.ngens(), 0)), 0) == 1);
    Modulus Nine(Ideal(IQInt(9)));
    int seen = 0;
    for (auto& e : Nine.characters()) {
        if (!(e.conductor() == Ideal(IQInt(9))) || e.sign() != 1) continue;
        CHECK(eisenstein_dim(e, 0) == 4);
        for (auto& g : e.galois_orbit()) CHECK(eisenstein_dim(g, 0) == 4);
        ++seen;
    }
    CHECK(seen > 0);
}

TEST_CASE("Moebius consistency of Eisenstein dimensions") {
    for (IQInt n : {IQInt(7, 1), pi * pi, IQInt(3) * pi, IQInt(3, -2) * pi * pi}) {
        Modulus M{Ideal(n)};
        auto rep = moebius_consistency(M, 0);
        INFO(n.str());
        for (auto& l : rep.lines) INFO(l);
        CHECK(rep.ok);
    }
}

TEST_CASE("character restriction and induction") {
    Modulus M(Ideal(IQInt(3, -2) * pi * pi));
    for (auto& eps : M.characters()) {
        Modulus Mf(eps.conductor());
        auto chi = restrict_char(eps, Mf);
        REQUIRE(chi.has_value());
        CHECK(induce(*chi, M) == eps);
        CHECK(chi->conductor() == eps.conductor());
    }
}

TEST_CASE("newform ledger") {
    NewformLedger L;
    Ideal one(IQInt(1)), p(pi), q(IQInt(3, -2)), pq(pi * IQInt(3, -2));
    CHECK_THROWS(L.update(pq, one, "t", 0, 0, 5, 3));
    L.update(one, one, "t", 0, 0, 0, 0);
    L.update(p, one, "t", 0, 0, 1, 1);
    auto& r = L.update(q, one, "t", 0, 0, 3, 1);
    CHECK(r.new_ == 2);
    auto& s = L.update(pq, one, "t", 0, 0, 8, 3);
    // old = tau(pi) * new(q) = 2 * 2
    CHECK(s.old == 4);
    CHECK(s.new_ == 1);
    CHECK_THROWS(L.update(pq, one, "t", 0, 0, 5, 3));
    CHECK(L.markdown(0, 0).find("| 3-2*w |") != std::string::npos);
    CHECK(L.csv().find("new") != std::string::npos);
}
