#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "areabd/io.hpp"
#include "areabd/rng.hpp"

using namespace areabd;

TEST_CASE("neighbor queries match brute force") {
    Rng rng(303);
    for (int d : {1, 2}) {
        for (bool torus : {true, false}) {
            DomainSpec dom = torus ? (d == 1 ? DomainSpec::torus(1, 2.3) : DomainSpec::torus(2, 2.3))
                                   : (d == 1 ? DomainSpec::box(0.0, 3.0)
                                             : DomainSpec::box(0.0, 3.0, 0.0, 3.0));
            ModelParams params(0.5, dom);
            std::vector<Vec> pts;
            for (int i = 0; i < 30; ++i) {
                Vec p{0, 0};
                for (int c = 0; c < d; ++c)
                    p[c] = torus ? rng.uniform(0.0, 2.3) : rng.uniform(0.0, 3.0);
                pts.push_back(p);
            }
            PointConfiguration cfg(params, pts);
            for (int rep = 0; rep < 20; ++rep) {
                Vec x{0, 0};
                for (int c = 0; c < d; ++c)
                    x[c] = torus ? rng.uniform(0.0, 2.3) : rng.uniform(0.0, 3.0);
                for (double range : {0.4, 1.0, 1.4}) {
                    auto got = cfg.neighbors(x, range);
                    std::size_t brute = 0;
                    for (const Vec& p : cfg.points())
                        if (dom.distance2(x, p) <= range * range) ++brute;
                    CHECK(got.size() == brute);
                }
            }
        }
    }
}

TEST_CASE("configuration round-trips through the text format") {
    Rng rng(17);
    std::vector<ModelParams> cases = {
        ModelParams(0.5, DomainSpec::torus(1, 7.5)),
        ModelParams(0.25, DomainSpec::torus(2, 3.25)),
        ModelParams(1.0, DomainSpec::box(-2.0, 5.0)),
        ModelParams(0.75, DomainSpec::box(0.0, 4.0, -1.0, 2.0)),
    };
    for (const ModelParams& params : cases) {
        std::vector<Vec> pts;
        const DomainSpec& dom = params.domain;
        for (int i = 0; i < 12; ++i) {
            Vec p{0, 0};
            for (int c = 0; c < dom.d; ++c)
                p[c] = dom.kind == DomainKind::torus ? rng.uniform(0.0, dom.L)
                                                     : rng.uniform(dom.lo[c], dom.hi[c]);
            pts.push_back(p);
        }
        PointConfiguration cfg(params, pts);
        std::stringstream ss;
        io::write_configuration(ss, cfg);
        PointConfiguration back = io::read_configuration(ss);
        REQUIRE(back.size() == cfg.size());
        CHECK(same_model(back.params(), params));
        for (std::size_t i = 0; i < cfg.size(); ++i) {
            CHECK(back[i][0] == cfg[i][0]);
            CHECK(back[i][1] == cfg[i][1]);
        }
    }
}

TEST_CASE("several records can share one stream") {
    ModelParams params(0.5, DomainSpec::torus(1, 6.0));
    PointConfiguration a(params, {{1.0, 0}});
    PointConfiguration b(params, {{2.0, 0}, {3.0, 0}});
    std::stringstream ss;
    io::write_configuration(ss, a);
    ss << '\n';
    io::write_configuration(ss, b);
    ss << '\n';
    ss.seekg(0);
    PointConfiguration a2 = io::read_configuration(ss);
    PointConfiguration b2 = io::read_configuration(ss);
    CHECK(a2.size() == 1);
    CHECK(b2.size() == 2);
}

TEST_CASE("malformed headers are rejected") {
    std::stringstream ss("d=1 kind=klein L=3 R=0.5\n");
    CHECK_THROWS(io::read_configuration(ss));
    std::stringstream ss2("hello\n");
    CHECK_THROWS(io::read_configuration(ss2));
}

TEST_CASE("region membership on wrapped boxes") {
    DomainSpec dom = DomainSpec::torus(1, 10.0);
    Region r = Region::box1(-2.0, 1.0);  // wraps across 0
    CHECK(r.contains(dom, {9.0, 0}));
    CHECK(r.contains(dom, {0.5, 0}));
    CHECK(!r.contains(dom, {5.0, 0}));
    Region shell = Region::shell(Region::box1(0.0, 1.0), Region::box1(-1.0, 2.0));
    CHECK(shell.contains(dom, {9.5, 0}));
    CHECK(shell.contains(dom, {1.5, 0}));
    CHECK(!shell.contains(dom, {0.5, 0}));
    CHECK(!shell.contains(dom, {5.0, 0}));
}
