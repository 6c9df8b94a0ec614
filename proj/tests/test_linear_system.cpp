#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <utility>

#include "hpfc/errors.hpp"
#include "hpfc/linear_system.hpp"
#include "hpfc/numerics.hpp"
#include "hpfc/rng.hpp"

using namespace hpfc;

namespace {

GainVector table_gains(Mode h) {
    GainVector g;
    if (h == Mode::position) {
        g.k1 = 190.0;
        g.k2 = 9.019e-4;
        g.k3 = 30.539e-9;
        g.ki = 5000.0;
    } else {
        g.k2 = 2.5e-4;
        g.k3 = 5.9e-8;
        g.k4 = 5e-5;
        g.ki = 1.2e-3;
    }
    return g;
}

OperatingPoint op_position() { return {2230.0, 1.0151e3, 30.755, 1.2e8}; }
OperatingPoint op_force() { return {2012.5, 6.2499e3, 0.0, 1.2e8}; }

Matrix top_left(const Matrix& m, int n) {
    Matrix out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = m(i, j);
    return out;
}

void require_same_spectrum(CVec got, CVec want, double tol) {
    auto by_re_im = [](const Cplx& a, const Cplx& b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    };
    std::sort(got.begin(), got.end(), by_re_im);
    std::sort(want.begin(), want.end(), by_re_im);
    REQUIRE(got.size() == want.size());
    for (size_t i = 0; i < got.size(); ++i)
        REQUIRE(std::abs(got[i] - want[i]) <= tol * (1.0 + std::abs(want[i])));
}

}  // namespace

TEST_CASE("feedback row and dynamic state indices") {
    GainVector g = table_gains(Mode::position);
    Vec k = feedback_row(g);
    REQUIRE(k.size() == 5);
    CHECK(k[0] == g.k1);
    CHECK(k[1] == g.k2);
    CHECK(k[2] == g.k3);
    CHECK(k[3] == g.k4);
    CHECK(k[4] == -g.ki);  // integral state enters with opposite sign

    CHECK(dynamic_state_indices(Mode::position) == std::vector<int>{0, 1, 2, 4});
    CHECK(dynamic_state_indices(Mode::force) == std::vector<int>{1, 2, 3, 4});
}

TEST_CASE("gain constraints per mode") {
    GainVector g = table_gains(Mode::position);
    CHECK_NOTHROW(g.validate(Mode::position));
    g.k4 = 1e-6;
    CHECK_THROWS_WITH_AS(g.validate(Mode::position), doctest::Contains("K4"), ValidationError);

    GainVector f = table_gains(Mode::force);
    CHECK_NOTHROW(f.validate(Mode::force));
    f.k1 = 1.0;
    CHECK_THROWS_WITH_AS(f.validate(Mode::force), doctest::Contains("K1"), ValidationError);

    GainVector bad;
    bad.k2 = std::nan("");
    CHECK_THROWS_AS(bad.validate(Mode::position), ValidationError);
}

TEST_CASE("pressure row of the position-mode closed loop") {
    PlantParams p;
    OperatingPoint op = op_position();
    ModeSystem sys = build_closed_loop(p, table_gains(Mode::position), Mode::position, op);

    double g4 = p.pressure_gain();
    double ko = p.k_valve * op.omega * p.k_g;  // 0.252e-6 * 2230

    CHECK(sys.a_bar(2, 0) == doctest::Approx(-3.051e11).epsilon(1e-3));
    CHECK(sys.a_bar(2, 0) == doctest::Approx(-g4 * ko * 190.0).epsilon(1e-15));
    CHECK(sys.a_bar(2, 1) == doctest::Approx(-2.8586e9).epsilon(5e-4));
    CHECK(sys.a_bar(2, 1) == doctest::Approx(-g4 * (ko * 9.019e-4 + p.a_bar)).epsilon(1e-15));
    CHECK(sys.a_bar(2, 4) == doctest::Approx(8.028e12).epsilon(1e-3));
    CHECK(sys.a_bar(2, 2) == doctest::Approx(g4 * p.cqp_hat - g4 * ko * 30.539e-9).epsilon(1e-15));

    // reference enters the valve through the position feed-forward K1
    CHECK(sys.b_bar[2] == doctest::Approx(g4 * ko * 190.0).epsilon(1e-15));
    CHECK(sys.b_bar[4] == 1.0);
    CHECK(sys.c_bar == Vec{1.0, 0.0, 0.0, 0.0, 0.0, 0.0});

    // friction offset rides on the constant state
    CHECK(sys.a_bar(1, 5) == doctest::Approx(-op.d_w / p.mass).epsilon(1e-15));
    CHECK(sys.a_bar(1, 5) == doctest::Approx(-18.064).epsilon(1e-3));
}

TEST_CASE("force-mode closed loop couples the load spring") {
    PlantParams p;
    OperatingPoint op = op_force();
    ModeSystem sys = build_closed_loop(p, table_gains(Mode::force), Mode::force, op);

    double g4 = p.pressure_gain();
    double ko = p.k_valve * op.omega * p.k_g;

    CHECK(sys.a_bar(1, 3) == doctest::Approx(-1.0 / p.mass).epsilon(1e-15));
    CHECK(sys.a_bar(3, 1) == op.stiffness);
    CHECK(sys.a_bar(4, 3) == -1.0);
    CHECK(sys.a_bar(2, 0) == 0.0);  // K1 = 0 in force mode
    CHECK(sys.a_bar(1, 5) == 0.0);  // force-mode friction offset is zero
    CHECK(sys.b_bar[2] == doctest::Approx(g4 * ko * 5e-5).epsilon(1e-15));
    CHECK(sys.c_bar == Vec{0.0, 0.0, 0.0, 1.0, 0.0, 0.0});
}

TEST_CASE("zero pattern of the switched system") {
    PlantParams p;

    auto check_mask = [&](Mode h, const OperatingPoint& op,
                          const std::set<std::pair<int, int>>& nonzero) {
        ModeSystem sys = build_closed_loop(p, table_gains(h), h, op);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) {
                INFO("mode ", mode_name(h), " entry (", i, ",", j, ")");
                if (nonzero.count({i, j}))
                    CHECK(sys.a_bar(i, j) != 0.0);
                else
                    CHECK(sys.a_bar(i, j) == 0.0);
            }
        for (int i = 0; i < 6; ++i) {
            INFO("mode ", mode_name(h), " b[", i, "]");
            if (i == 2 || i == 4)
                CHECK(sys.b_bar[i] != 0.0);
            else
                CHECK(sys.b_bar[i] == 0.0);
        }
    };

    // position: F_L frozen (row/col 3 empty), K4 = 0, dead-zone offset d_g = 0
    check_mask(Mode::position, op_position(),
               {{0, 1}, {1, 1}, {1, 2}, {1, 5}, {2, 0}, {2, 1}, {2, 2}, {2, 4}, {4, 0}});
    // force: x decoupled (col 0 empty), spring feeds F_L, d_w = 0
    check_mask(Mode::force, op_force(),
               {{0, 1}, {1, 1}, {1, 2}, {1, 3}, {2, 1}, {2, 2}, {2, 3}, {2, 4}, {3, 1}, {4, 3}});
}

TEST_CASE("open-loop wiring before feedback") {
    PlantParams p;
    OpenLoopAug pos = open_loop_augmented(p, op_position(), Mode::position);
    CHECK(pos.c_e == Vec{1.0, 0.0, 0.0, 0.0, 0.0});
    for (int j = 0; j < 5; ++j) CHECK(pos.a_e(4, j) == -pos.c_e[j]);
    CHECK(pos.f_e[1] == doctest::Approx(-18.064).epsilon(1e-3));
    CHECK(pos.b_e[2] ==
          doctest::Approx(p.pressure_gain() * p.k_valve * 2230.0 * p.k_g).epsilon(1e-15));
    CHECK(pos.a_e(1, 3) == 0.0);  // no load coupling in position mode
    CHECK(pos.a_e(3, 1) == 0.0);

    OpenLoopAug frc = open_loop_augmented(p, op_force(), Mode::force);
    CHECK(frc.c_e == Vec{0.0, 0.0, 0.0, 1.0, 0.0});
    CHECK(frc.a_e(4, 3) == -1.0);
    CHECK(frc.a_e(3, 1) == op_force().stiffness);
    CHECK(frc.f_e[1] == 0.0);
}

TEST_CASE("feedback over the open loop reproduces the closed-loop block") {
    auto check_consistent = [](const PlantParams& p, const GainVector& g, Mode h,
                               const OperatingPoint& op) {
        ModeSystem sys = build_closed_loop(p, g, h, op);
        OpenLoopAug ol = open_loop_augmented(p, op, h);
        Vec k = feedback_row(g);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) {
                double closed = ol.a_e(i, j) - ol.b_e[i] * k[j];
                double want = sys.a_bar(i, j);
                INFO("mode ", mode_name(h), " entry (", i, ",", j, ")");
                CHECK(std::fabs(closed - want) <= 1e-12 * std::max(1.0, std::fabs(want)));
            }
    };

    PlantParams p;
    for (double cqp : {0.0, -1e-11}) {
        p.cqp_hat = cqp;
        check_consistent(p, table_gains(Mode::position), Mode::position, op_position());
        check_consistent(p, table_gains(Mode::force), Mode::force, op_force());
    }

    // the identity is structural: it must hold for arbitrary parameters
    std::mt19937_64 st(0xc0de);
    for (int trial = 0; trial < 20; ++trial) {
        PlantParams rp;
        rp.a_bar = 5e-4 + 1.5e-3 * uniform01(st);
        rp.mass = 1.0 + 2.0 * uniform01(st);
        rp.bulk = 5e8 + 1.5e9 * uniform01(st);
        rp.v_t = 1e-3 + 1e-3 * uniform01(st);
        rp.k_valve = 1e-7 + 4e-7 * uniform01(st);
        rp.k_g = 0.5 + 1.5 * uniform01(st);
        rp.d_g = 0.2 * (uniform01(st) - 0.5);
        rp.cqp_hat = -1e-10 * uniform01(st);
        OperatingPoint op{1500.0 + 1000.0 * uniform01(st), 100.0 + 6000.0 * uniform01(st),
                          50.0 * uniform01(st), 1e7 + 1.9e8 * uniform01(st)};
        Mode h = uniform01(st) < 0.5 ? Mode::position : Mode::force;
        GainVector g;
        g.k2 = 1e-5 + 1e-2 * uniform01(st);
        g.k3 = 1e-9 + 1e-7 * uniform01(st);
        g.ki = h == Mode::position ? 10.0 + 1e4 * uniform01(st) : 1e-4 + uniform01(st);
        if (h == Mode::position)
            g.k1 = 1.0 + 500.0 * uniform01(st);
        else
            g.k4 = 1e-6 + 1e-3 * uniform01(st);
        check_consistent(rp, g, h, op);
    }
}

TEST_CASE("constant-state augmentation is spectrally inert") {
    PlantParams p;
    for (Mode h : {Mode::position, Mode::force}) {
        OperatingPoint op = h == Mode::position ? op_position() : op_force();
        ModeSystem sys = build_closed_loop(p, table_gains(h), h, op);
        CVec block = eigenvalues(top_left(sys.a_bar, 5));
        block.emplace_back(0.0, 0.0);
        require_same_spectrum(eigenvalues(sys.a_bar), block, 1e-6);
    }
}

TEST_CASE("operating point validation") {
    PlantParams p;
    GainVector g = table_gains(Mode::position);
    OperatingPoint op = op_position();
    op.omega = 0.0;
    CHECK_THROWS_WITH_AS(build_closed_loop(p, g, Mode::position, op),
                         doctest::Contains("omega"), ValidationError);

    OperatingPoint no_spring = op_force();
    no_spring.stiffness = 0.0;
    CHECK_THROWS_WITH_AS(open_loop_augmented(p, no_spring, Mode::force),
                         doctest::Contains("stiffness"), ValidationError);
    no_spring.stiffness = 0.0;
    CHECK_NOTHROW(open_loop_augmented(p, op_position(), Mode::position));
}
