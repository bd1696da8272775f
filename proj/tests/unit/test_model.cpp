#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hetpol/model.hpp"
#include "hetpol/rng.hpp"

using namespace hetpol;

TEST_CASE("params validation rejects out-of-range values") {
    ModelParams p;
    CHECK_NOTHROW(p.validate());
    p.lambda = -0.1;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p = {};
    p.p = 1.5;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p = {};
    p.d = 0;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p = {};
    p.n = 0;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
}

TEST_CASE("disorder sampling is deterministic and prefix-stable") {
    ModelParams p;
    p.n = 500;
    const auto a = sample_disorder(p, 42);
    const auto b = sample_disorder(p, 42);
    CHECK(a == b);
    CHECK_FALSE(a == sample_disorder(p, 43));

    ModelParams shorter = p;
    shorter.n = 100;
    const auto s = sample_disorder(shorter, 42);
    for (int i = 1; i <= 100; ++i) {
        CHECK(s.omega_at(i) == a.omega_at(i));
        CHECK(s.eta_at(i) == a.eta_at(i));
    }
}

TEST_CASE("droplet density extremes") {
    ModelParams p;
    p.n = 1000;
    p.p = 0.0;
    const auto none = sample_disorder(p, 1);
    p.p = 1.0;
    const auto all = sample_disorder(p, 1);
    for (int i = 1; i <= p.n; ++i) {
        CHECK(none.eta_at(i) == -1);
        CHECK(all.eta_at(i) == 1);
        CHECK(none.omega_at(i) == all.omega_at(i));
    }
}

TEST_CASE("empirical frequencies match the disorder law") {
    ModelParams p;
    p.n = 200000;
    p.p = 0.3;
    const auto dis = sample_disorder(p, 9);
    double plus = 0.0;
    double drops = 0.0;
    for (int i = 1; i <= p.n; ++i) {
        plus += dis.omega_at(i) > 0;
        drops += dis.eta_at(i) > 0;
    }
    const double n = p.n;
    CHECK(std::abs(plus / n - 0.5) < 4.0 * std::sqrt(0.25 / n));
    CHECK(std::abs(drops / n - 0.3) < 4.0 * std::sqrt(0.21 / n));
}

TEST_CASE("sign field is -1 only on the axis inside a droplet") {
    const Disorder dis(0, 0.5, {1, -1, 1}, {1, -1, 1});
    CHECK(delta(dis, 1, true) == -1);
    CHECK(delta(dis, 1, false) == 1);
    CHECK(delta(dis, 2, true) == 1);
    CHECK(delta(dis, 3, true) == -1);
}

TEST_CASE("views and JSON round trip") {
    ModelParams p;
    p.n = 50;
    const auto dis = sample_disorder(p, 5);
    const auto v = dis.view(10, 20);
    CHECK(v.length() == 20);
    CHECK(v.omega_at(1) == dis.omega_at(11));
    CHECK(v.droplet_at(20) == (dis.eta_at(30) > 0));
    CHECK(Disorder::from_json(dis.to_json()) == dis);
    CHECK_THROWS_AS(Disorder::from_json("{"), InvalidArgument);
    CHECK_THROWS_AS(dis.omega_at(0), InvalidArgument);
    CHECK_THROWS_AS(dis.omega_at(51), InvalidArgument);
}

TEST_CASE("stream derivation separates indices and tags") {
    CHECK(derive_seed(1, 0, StreamTag::omega) != derive_seed(1, 1, StreamTag::omega));
    CHECK(derive_seed(1, 0, StreamTag::omega) != derive_seed(1, 0, StreamTag::eta));
    Rng a(7, 3, StreamTag::job);
    Rng b(7, 3, StreamTag::job);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    Rng r(11);
    for (int i = 0; i < 1000; ++i) {
        const double u = r.uniform();
        CHECK((u >= 0.0 && u < 1.0));
        CHECK(r.below(7) < 7);
    }
}
