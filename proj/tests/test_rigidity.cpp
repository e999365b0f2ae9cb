#include "doctest.h"

#include "bianchi/rigidity.hpp"

using namespace bianchi;

namespace {

const long p = 3;
PadicInt ex(long v) { return PadicInt::exact(p, v); }

PSeries2 poly(std::initializer_list<std::tuple<int, int, long>> terms, int D = 32, int M = 60) {
    PSeries2 f = PSeries2::zp(p, D, M);
    for (auto& [i, j, c] : terms) f.set(i, j, c);
    return f;
}

PSeries2 torus(long N, int D = 32) { return PSeries2::translate(p, D, 60, ex(N), 0, 0); }

}  // namespace

TEST_CASE("p-adic integers track precision") {
    PadicInt a(p, 5, 4), b(p, 9, 10);
    CHECK((a + b).prec() == 4);
    // 9 = 3^2: the product is known to 4 + 2
    CHECK((a * b).prec() == 6);
    CHECK(*(a * b).valuation() == 2);
    CHECK(PadicInt(p, 81, 4).is_zero());
    CHECK(!PadicInt(p, 81, 4).valuation());
    PadicInt inv = a.inverse(4);
    CHECK((inv * a - ex(1)).is_zero());
    CHECK(ex(-7).signed_value() == -7);
    CHECK(PadicInt(p, -7, 5).signed_value() == -7);
}

TEST_CASE("cyclotomic rings: lambda is a uniformizer") {
    for (int m = 1; m <= 3; ++m) {
        const CycRing* R = CycRing::get(p, m);
        CycPadic l = CycPadic::lambda(R);
        CHECK(l.valuation().v == mpq_class(1, R->n));
        CHECK(l.pow(R->n).valuation().v == 1);
        CycPadic z = CycPadic::zeta_pow(R, 1);
        long q = ppow(p, m).get_si();
        CHECK((z.pow(q) - CycPadic(R, ex(1))).exact_zero());
        CHECK(!(z.pow(q / p) - CycPadic(R, ex(1))).is_zero());
    }
    // zeta_9 sits in Z_p[zeta_27] as zeta_27^3
    const CycRing* R2 = CycRing::get(p, 2);
    const CycRing* R3 = CycRing::get(p, 3);
    CHECK((CycPadic::zeta_pow(R2, 4).embed(R3) - CycPadic::zeta_pow(R3, 12)).exact_zero());
}

TEST_CASE("digit valuation agrees with the norm") {
    std::mt19937_64 rng(7);
    for (int m = 1; m <= 3; ++m) {
        const CycRing* R = CycRing::get(p, m);
        std::uniform_int_distribution<long> d(-20, 20);
        for (int t = 0; t < 20; ++t) {
            CycPadic x(R);
            for (int i = 0; i < R->n; ++i) x[i] = ex(d(rng) * (t % 3 == 0 ? 3 : 1));
            if (x.exact_zero()) continue;
            CHECK(x.valuation() == x.norm_valuation());
        }
    }
}

TEST_CASE("division and inverses in Z_p[zeta]") {
    const CycRing* R = CycRing::get(p, 2);
    CycPadic l = CycPadic::lambda(R);
    CycPadic u = CycPadic(R, ex(2)) + l * l;
    CycPadic ui = u.inverse(40);
    CHECK((u * ui - CycPadic(R, ex(1))).is_zero());
    CycPadic x = u * l.pow(5);
    auto q = x.divide(l.pow(3), 40);
    REQUIRE(q);
    CHECK((*q - u * l * l).is_zero());
    CHECK(!l.divide(x, 40));
}

TEST_CASE("eval_special examples") {
    // (X+1)^3 - (Y+1) vanishes at zeta' = zeta^3
    PSeries2 f = torus(3);
    CHECK(eval_special(f, {0, 3, 5, 3, 15}).kind == PVal::Infinite);
    CHECK(eval_special(f, {0, 3, 5, 3, 14}).kind == PVal::Finite);
    PSeries2 d = poly({{1, 0, 1}, {0, 1, -1}});
    CHECK(eval_special(d, {2, 2, 4, 2, 4}).kind == PVal::Infinite);
    PSeries2 g = poly({{1, 0, 1}, {0, 0, -3}});
    PVal v = eval_special(g, {0, 2, 1, 0, 0});
    CHECK(v.kind == PVal::Finite);
    CHECK(v.v == mpq_class(1, 6));
}

TEST_CASE("translate vanishes exactly on zeta' = xi zeta^N") {
    for (auto [N, m, a] : {std::tuple<long, int, long>{2, 2, 4}, {5, 1, 1}, {4, 0, 0}}) {
        PSeries2 f = PSeries2::translate(p, 32, 60, ex(N), m, a);
        long xi27 = a * ppow(p, 3 - m).get_si();
        int zeros = 0;
        for (long s = 0; s < 27; ++s)
            for (long t = 0; t < 27; ++t) {
                PVal v = eval_special(f, {0, 3, s, 3, t});
                bool on = ((xi27 + N * s - t) % 27 + 27) % 27 == 0;
                CHECK((v.kind == PVal::Infinite) == on);
                zeros += on;
            }
        CHECK(zeros == 27);
    }
}

TEST_CASE("valuations add under products") {
    std::mt19937_64 rng(11);
    int checked = 0;
    for (int t = 0; t < 10; ++t) {
        PSeries2 f = PSeries2::random(CycRing::get(p, 0), 16, 40, rng, false);
        PSeries2 g = PSeries2::random(CycRing::get(p, 0), 16, 40, rng, false);
        PSeries2 h = f * g;
        for (ClassicalPoint pt : {ClassicalPoint{0, 2, 1, 1, 2}, ClassicalPoint{1, 2, 7, 2, 2}}) {
            PVal a = eval_special(f, pt), b = eval_special(g, pt), c = eval_special(h, pt);
            if (!a.determinate() || !b.determinate() || !c.determinate()) continue;
            CHECK(c == a + b);
            ++checked;
        }
    }
    CHECK(checked > 10);
}

TEST_CASE("recenter examples and round trip") {
    PSeries2 x = poly({{1, 0, 1}});
    CHECK(recenter(x, ex(0)).at(1, 0)[0].value() == 1);
    PSeries2 r = recenter(x, ex(1));
    CHECK(r.at(1, 0)[0].value() == 4);
    CHECK(r.at(0, 0)[0].value() == 3);
    CHECK(r.at(0, 1).exact_zero());

    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
        PSeries2 f = PSeries2::random(CycRing::get(p, 0), 12, 30, rng, false);
        PadicInt K(p, (long)(rng() % 1000), 30);
        PSeries2 back = recenter(recenter(f, K), -K);
        for (int s = 0; s <= 12; ++s)
            for (int j = 0; j <= s; ++j) CHECK((back.at(s - j, j) - f.at(s - j, j)).is_zero());
    }
    // polynomials lose nothing
    PSeries2 g = torus(4);
    PSeries2 gb = recenter(recenter(g, ex(2)), ex(-2));
    CHECK((gb.at(2, 0) - g.at(2, 0)).is_zero());
    CHECK(gb.at(2, 0)[0].prec() >= 50);
}

TEST_CASE("torus substitution") {
    CHECK(torus_substitute(torus(3), ex(3), 0, 0).zero);
    CHECK(torus_substitute(poly({{1, 0, 1}, {0, 1, -1}}), ex(1), 0, 0).zero);
    CHECK(!torus_substitute(torus(3), ex(4), 0, 0).zero);
    // p-adic exponent: (X+1)^N is a genuine series
    PadicInt N(p, mpz_class("123456789012345"), 40);
    PSeries2 f = PSeries2::translate(p, 32, 60, N, 0, 0);
    CHECK(!f.polynomial());
    auto ts = torus_substitute(f, N, 0, 0);
    CHECK(ts.zero);
    CHECK(ts.verified.kind == PVal::AtLeast);
    CHECK(!torus_substitute(f, N + ex(81), 0, 0).zero);
}

TEST_CASE("classification of the basic shapes") {
    CHECK(classify(poly({{1, 0, 1}, {0, 1, -1}})).shape == Shape::Diagonal);
    for (long N : {2, 3, 4, 5, 6, 7, 8, 9}) {
        auto c = classify(torus(N));
        REQUIRE(c.shape == Shape::TorusTranslate);
        CHECK(c.translate->N.value() == N);
        CHECK(c.translate->m == 0);
        CHECK(!c.translate->swap);
    }
    auto c = classify(poly({{2, 0, 1}, {0, 1, -3}}));
    CHECK(c.shape == Shape::NoTranslate);
    CHECK(c.points_sampled > 0);
    CHECK_THROWS(classify(poly({{0, 0, 1}, {1, 0, 1}})));
}

TEST_CASE("swapping the variables only moves the swap flag") {
    auto a = classify(torus(3));
    auto b = classify(torus(3).swapped());
    REQUIRE(b.shape == Shape::TorusTranslate);
    CHECK(b.translate->swap);
    CHECK(b.translate->N.value() == 3);
    CHECK(!a.translate->swap);
    CHECK(classify(poly({{2, 0, 1}, {0, 1, -3}}).swapped()).shape == Shape::NoTranslate);
}

TEST_CASE("planted translates are recovered") {
    std::mt19937_64 rng(2024);
    const CycRing* O = CycRing::get(p, 3);
    for (int t = 0; t < 12; ++t) {
        int m = t % 4;
        long q = ppow(p, m).get_si();
        long a = 0;
        if (m) do a = (long)(rng() % q);
            while (a % p == 0);
        long N = 2 + (long)(rng() % 9);
        PSeries2 g = PSeries2::translate(p, 32, 60, ex(N), m, a, 3);
        PSeries2 u = PSeries2::random_unit_poly(O, 32, 60, 30 - (int)N, rng);
        PSeries2 f = g * u;
        REQUIRE(f.polynomial());
        auto d = detect_translate(f, 3);
        REQUIRE(d.hit);
        CHECK(d.hit->N.value() == N);
        CHECK(d.hit->m == m);
        CHECK(d.hit->a == a);
        // the perturbed exponent fails
        CHECK(!torus_substitute(f, ex(N + 1), m, a).zero);
    }
}

TEST_CASE("unit multiples classify the same") {
    std::mt19937_64 rng(99);
    const CycRing* O = CycRing::get(p, 0);
    for (int t = 0; t < 4; ++t) {
        PSeries2 u = PSeries2::random_unit_poly(O, 32, 60, 10, rng);
        auto c = classify(torus(1 + p) * u);
        REQUIRE(c.shape == Shape::TorusTranslate);
        CHECK(c.translate->N.value() == 1 + p);
        CHECK(classify(poly({{2, 0, 1}, {0, 1, -3}}) * u, 3, 0).shape == Shape::NoTranslate);
        CHECK(classify(poly({{1, 0, 1}, {0, 1, -1}}) * u).shape == Shape::Diagonal);
    }
}

TEST_CASE("json round trip") {
    PSeries2 f = torus(5);
    PSeries2 g = PSeries2::from_json(f.to_json(), p, 32, 60);
    CHECK(!g.polynomial());
    for (int s = 0; s <= 32; ++s)
        for (int j = 0; j <= s; ++j) CHECK((g.at(s - j, j) - f.at(s - j, j)).is_zero());
    auto c = classify(g);
    REQUIRE(c.shape == Shape::TorusTranslate);
    CHECK(c.translate->N.signed_value() == 5);
}
