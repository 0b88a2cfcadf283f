#include <cmath>
#include <filesystem>

#include <catch_amalgamated.hpp>

#include "loadcast/errors.hpp"
#include "loadcast/neural/gradient_check.hpp"
#include "loadcast/neural/model_io.hpp"
#include "loadcast/neural/network.hpp"
#include "oracles/cell_oracle.hpp"

using namespace loadcast;
using namespace loadcast::neural;
using Catch::Approx;

namespace {

NetworkSpec small_spec(CellKind kind, int hidden, double dropout = 0.0) {
    NetworkSpec s;
    s.cell = kind;
    s.window = 6;
    s.units = hidden;
    s.dense_units = 5;
    s.dropout_rate = dropout;
    return s;
}

Eigen::MatrixXd random_windows(int window, int batch, Rng& rng) {
    Eigen::MatrixXd x(window, batch);
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        x.data()[k] = rng.uniform();
    }
    return x;
}

}  // namespace

TEST_CASE("activations") {
    Eigen::MatrixXd x(1, 1);
    x << 0.0;
    CHECK(apply_activation(Activation::sigmoid, x)(0, 0) == 0.5);
    CHECK(apply_activation(Activation::tanh, x)(0, 0) == 0.0);
    CHECK(stable_sigmoid(-3.0) == Approx(1.0 - stable_sigmoid(3.0)).margin(1e-15));
    // no overflow at the extremes
    CHECK(stable_sigmoid(-1000.0) == 0.0);
    CHECK(stable_sigmoid(1000.0) == 1.0);
    CHECK(std::isfinite(stable_sigmoid(-710.0)));
}

TEST_CASE("lstm_step limits") {
    SECTION("zero params") {
        const auto p = LstmParams<double>::zeros(4, 1);
        Eigen::MatrixXd x = Eigen::MatrixXd::Constant(1, 1, 0.7);
        const auto [next, cache] = lstm_step(p, x, LstmState<double>::zeros(4, 1));
        CHECK((cache.i.array() == 0.5).all());
        CHECK((cache.f.array() == 0.5).all());
        CHECK((cache.o.array() == 0.5).all());
        CHECK((cache.candidate.array() == 0.0).all());
        CHECK(next.c.isZero(0));
        CHECK(next.h.isZero(0));
    }
    SECTION("saturated forget gate carries c") {
        auto p = LstmParams<double>::zeros(3, 1);
        p.b_f.setConstant(20.0);
        LstmState<double> s = LstmState<double>::zeros(3, 1);
        s.c << 0.3, -1.2, 2.0;
        const auto [next, cache] = lstm_step(p, Eigen::MatrixXd(Eigen::MatrixXd::Constant(1, 1, 0.5)), s);
        for (int r = 0; r < 3; ++r) {
            CHECK(next.c(r, 0) == Approx(s.c(r, 0)).margin(1e-8));
            CHECK(next.h(r, 0) == Approx(0.5 * std::tanh(s.c(r, 0))).margin(1e-8));
        }
    }
    SECTION("conservation with forget saturated and input closed") {
        auto p = LstmParams<double>::zeros(2, 1);
        p.b_f.setConstant(40.0);
        p.b_i.setConstant(-40.0);
        Rng rng(1);
        oracle::fill(p.w_c, rng, 1.0);
        LstmState<double> s = LstmState<double>::zeros(2, 1);
        s.c << 0.9, -0.4;
        const Eigen::MatrixXd c0 = s.c;
        for (int t = 0; t < 6; ++t) {
            s = lstm_step(p, Eigen::MatrixXd(Eigen::MatrixXd::Constant(1, 1, rng.uniform())), s).first;
        }
        CHECK((s.c - c0).cwiseAbs().maxCoeff() < 1e-15);
    }
    SECTION("shape mismatch") {
        const auto p = LstmParams<double>::zeros(3, 1);
        CHECK_THROWS_AS(lstm_step(p, Eigen::MatrixXd(Eigen::MatrixXd::Zero(2, 1)), LstmState<double>::zeros(3, 1)), Error);
        CHECK_THROWS_AS(lstm_step(p, Eigen::MatrixXd(Eigen::MatrixXd::Zero(1, 1)), LstmState<double>::zeros(2, 1)), Error);
    }
}

TEST_CASE("gru_step limits") {
    SECTION("zero params halves the state") {
        const auto p = GruParams<double>::zeros(3, 1);
        Eigen::MatrixXd c(3, 1);
        c << 0.8, -0.2, 1.5;
        const auto [next, cache] = gru_step(p, Eigen::MatrixXd(Eigen::MatrixXd::Constant(1, 1, 0.4)), c);
        CHECK((cache.r.array() == 0.5).all());
        CHECK((cache.z.array() == 0.5).all());
        CHECK((cache.m.array() == 0.0).all());
        CHECK(next.isApprox(0.5 * c, 0));
    }
    SECTION("Z forced to one") {
        auto p = GruParams<double>::zeros(3, 1);
        p.b_z.setConstant(20.0);
        Rng rng(2);
        oracle::fill(p.v_m, rng, 1.0);
        Eigen::MatrixXd c(3, 1);
        c << 0.8, -0.2, 1.5;
        const auto [next, cache] = gru_step(p, Eigen::MatrixXd(Eigen::MatrixXd::Constant(1, 1, 0.9)), c);
        CHECK((next - cache.m).cwiseAbs().maxCoeff() < 1e-7);
    }
    SECTION("shape mismatch") {
        const auto p = GruParams<double>::zeros(3, 1);
        CHECK_THROWS_AS(gru_step(p, Eigen::MatrixXd(Eigen::MatrixXd::Zero(1, 1)), Eigen::MatrixXd(Eigen::MatrixXd::Zero(2, 1))), Error);
    }
}

TEST_CASE("cells match the scalar transcription") {
    Rng rng(99);
    for (int trial = 0; trial < 25; ++trial) {
        const int hidden = 3;
        const auto lp = oracle::random_lstm(hidden, 1, rng);
        const auto x = oracle::random_vec(1, rng);
        const auto h0 = oracle::random_vec(hidden, rng);
        const auto c0 = oracle::random_vec(hidden, rng);
        const auto ref = oracle::lstm_step(lp, x, h0, c0);
        LstmState<double> s{oracle::col(h0), oracle::col(c0)};
        const auto [next, cache] = lstm_step(lp, oracle::col(x), s);
        CHECK(oracle::max_diff(next.h, ref.h) < 1e-12);
        CHECK(oracle::max_diff(next.c, ref.c) < 1e-12);
        CHECK(oracle::max_diff(cache.i, ref.i) < 1e-12);
        CHECK(oracle::max_diff(cache.candidate, ref.g) < 1e-12);

        const auto gp = oracle::random_gru(hidden, 1, rng);
        const auto gref = oracle::gru_step(gp, x, c0);
        const auto [gnext, gcache] = gru_step(gp, oracle::col(x), oracle::col(c0));
        CHECK(oracle::max_diff(gnext, gref.c) < 1e-12);
        CHECK(oracle::max_diff(gcache.m, gref.m) < 1e-12);
    }
}

TEST_CASE("gate ranges and GRU convexity") {
    Rng rng(4);
    const auto lp = oracle::random_lstm(8, 1, rng, 3.0);
    const auto gp = oracle::random_gru(8, 1, rng, 3.0);
    LstmState<double> s = LstmState<double>::zeros(8, 5);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(8, 5);
    for (int t = 0; t < 6; ++t) {
        const Eigen::MatrixXd x = random_windows(1, 5, rng) * 4.0;
        auto [next, cache] = lstm_step(lp, x, s);
        for (const auto* g : {&cache.i, &cache.f, &cache.o}) {
            CHECK((g->array() > 0.0).all());
            CHECK((g->array() < 1.0).all());
        }
        CHECK((cache.candidate.array().abs() < 1.0).all());
        s = std::move(next);

        auto [cn, gc] = gru_step(gp, x, c);
        CHECK((gc.r.array() > 0.0).all());
        CHECK((gc.z.array() < 1.0).all());
        CHECK((gc.m.array().abs() < 1.0).all());
        const Eigen::ArrayXXd lo = c.array().min(gc.m.array());
        const Eigen::ArrayXXd hi = c.array().max(gc.m.array());
        CHECK((cn.array() >= lo - 1e-15).all());
        CHECK((cn.array() <= hi + 1e-15).all());
        c = std::move(cn);
    }
}

TEST_CASE("single-unit single-step LSTM gradient matches the closed form") {
    auto p = LstmParams<double>::zeros(1, 1);
    p.w_i << 0.3, -0.5;
    p.w_f << -0.7, 0.2;
    p.w_o << 0.4, 0.9;
    p.w_c << -0.6, 0.8;
    p.b_i << 0.1;
    p.b_f << -0.2;
    p.b_o << 0.05;
    p.b_c << 0.3;
    const double h0 = -0.2, c0 = 0.3, x = 0.7;
    LstmState<double> s{Eigen::MatrixXd(Eigen::MatrixXd::Constant(1, 1, h0)), Eigen::MatrixXd(Eigen::MatrixXd::Constant(1, 1, c0))};
    const auto [next, cache] = lstm_step(p, Eigen::MatrixXd(Eigen::MatrixXd::Constant(1, 1, x)), s);

    // L = h_t
    auto grads = LstmParams<double>::zeros(1, 1);
    const auto back = lstm_step_backward(p, cache, Eigen::MatrixXd(Eigen::MatrixXd::Ones(1, 1)), Eigen::MatrixXd(Eigen::MatrixXd::Zero(1, 1)), grads);

    const auto sg = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
    const double i = sg(0.3 * h0 - 0.5 * x + 0.1);
    const double f = sg(-0.7 * h0 + 0.2 * x - 0.2);
    const double o = sg(0.4 * h0 + 0.9 * x + 0.05);
    const double g = std::tanh(-0.6 * h0 + 0.8 * x + 0.3);
    const double c = f * c0 + i * g;
    const double tc = std::tanh(c);
    const double dc = o * (1.0 - tc * tc);
    const double ai = dc * g * i * (1.0 - i);
    const double af = dc * c0 * f * (1.0 - f);
    const double ao = tc * o * (1.0 - o);
    const double ag = dc * i * (1.0 - g * g);

    CHECK(next.h(0, 0) == Approx(o * tc).epsilon(1e-14));
    CHECK(std::abs(grads.b_i(0) - ai) < 1e-10);
    CHECK(std::abs(grads.b_f(0) - af) < 1e-10);
    CHECK(std::abs(grads.b_o(0) - ao) < 1e-10);
    CHECK(std::abs(grads.b_c(0) - ag) < 1e-10);
    CHECK(std::abs(grads.w_i(0, 0) - ai * h0) < 1e-10);
    CHECK(std::abs(grads.w_i(0, 1) - ai * x) < 1e-10);
    CHECK(std::abs(grads.w_f(0, 1) - af * x) < 1e-10);
    CHECK(std::abs(grads.w_o(0, 0) - ao * h0) < 1e-10);
    CHECK(std::abs(grads.w_c(0, 1) - ag * x) < 1e-10);
    CHECK(std::abs(back.dc_prev(0, 0) - dc * f) < 1e-10);
    const double dh_prev = ai * 0.3 + af * -0.7 + ao * 0.4 + ag * -0.6;
    const double dx = ai * -0.5 + af * 0.2 + ao * 0.9 + ag * 0.8;
    CHECK(std::abs(back.dh_prev(0, 0) - dh_prev) < 1e-10);
    CHECK(std::abs(back.dx(0, 0) - dx) < 1e-10);
}

TEST_CASE("forward pass contracts") {
    Rng rng(8);
    const auto spec = small_spec(CellKind::lstm, 6, 0.4);
    const Eigen::MatrixXd x = random_windows(6, 7, rng);

    SECTION("zero network predicts zero") {
        const auto zero = NetworkParams<double>::zeros(spec);
        const auto out = forward(spec, zero, x, Mode::infer);
        CHECK(out.prediction.isZero(0));
    }
    SECTION("infer mode is pure") {
        Rng init(derive_seed(1, "init"));
        const auto params = init_params<double>(spec, init);
        const auto a = forward(spec, params, x, Mode::infer).prediction;
        const auto b = forward(spec, params, x, Mode::infer).prediction;
        CHECK(a == b);
        CHECK((a.array().abs() < 1.0).all());
    }
    SECTION("train mode with rate 0 equals infer") {
        auto s0 = spec;
        s0.dropout_rate = 0.0;
        Rng init(derive_seed(1, "init"));
        const auto params = init_params<double>(s0, init);
        Rng drop(5);
        CHECK(forward(s0, params, x, Mode::train, &drop).prediction == forward(s0, params, x, Mode::infer).prediction);
    }
    SECTION("train mode with dropout differs and needs a random source") {
        Rng init(derive_seed(1, "init"));
        const auto params = init_params<double>(spec, init);
        Rng drop(5);
        CHECK(forward(spec, params, x, Mode::train, &drop).prediction != forward(spec, params, x, Mode::infer).prediction);
        CHECK_THROWS_AS(forward(spec, params, x, Mode::train), Error);
    }
    SECTION("dimension error") {
        const auto zero = NetworkParams<double>::zeros(spec);
        CHECK_THROWS_AS(forward(spec, zero, Eigen::MatrixXd(Eigen::MatrixXd::Zero(5, 2)), Mode::infer), Error);
    }
}

TEST_CASE("dropout statistics") {
    Rng rng(2024);
    const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(100, 100);
    CHECK(apply_dropout(ones, 0.0, rng, Mode::train) == ones);
    CHECK(apply_dropout(ones, 0.9, rng, Mode::infer) == ones);
    Eigen::MatrixXd mask;
    const Eigen::MatrixXd out = apply_dropout(ones, 0.4, rng, Mode::train, &mask);
    const double zeros = static_cast<double>((out.array() == 0.0).count()) / 10000.0;
    CHECK(out.mean() == Approx(1.0).margin(0.05));
    CHECK(zeros == Approx(0.4).margin(0.03));
    CHECK(((out.array() == 0.0) || ((out.array() - 1.0 / 0.6).abs() < 1e-12)).all());
    CHECK(out == mask);
    CHECK_THROWS_AS(apply_dropout(ones, 1.0, rng, Mode::train), Error);
}

TEST_CASE("backward contracts") {
    Rng rng(31);
    const auto spec = small_spec(CellKind::gru, 5);
    Rng init(derive_seed(3, "init"));
    const auto params = init_params<double>(spec, init);
    const Eigen::MatrixXd x = random_windows(6, 4, rng);
    const auto fwd = forward(spec, params, x, Mode::infer);

    const auto zero = backward(spec, params, fwd.cache, Eigen::MatrixXd(Eigen::MatrixXd::Zero(1, 4)));
    auto blocks = param_blocks(const_cast<NetworkParams<double>&>(zero));
    for (const auto& b : blocks) {
        CHECK(b.map().isZero(0));
    }
    ForwardCache<double> missing;
    CHECK_THROWS_AS(backward(spec, params, missing, Eigen::MatrixXd(Eigen::MatrixXd::Zero(1, 4))), Error);
}

TEST_CASE("gradient check") {
    Rng rng(77);
    for (const auto kind : {CellKind::lstm, CellKind::gru}) {
        const auto spec = small_spec(kind, 8);
        Rng init(derive_seed(12, "init"));
        const auto params = init_params<double>(spec, init);
        const Eigen::MatrixXd x = random_windows(6, 3, rng);
        const Eigen::MatrixXd y = random_windows(1, 3, rng);
        const auto r = gradient_check<double>(spec, params, x, y);
        INFO(to_string(kind) << " worst " << r.worst_block << "[" << r.worst_index << "]");
        CHECK(r.max_relative_error < 1e-5);
        CHECK(r.parameters_checked == count_parameters(params));
    }
}

TEST_CASE("gradient check with a frozen dropout mask") {
    Rng rng(78);
    const auto spec = small_spec(CellKind::lstm, 4, 0.4);
    Rng init(derive_seed(13, "init"));
    const auto params = init_params<double>(spec, init);
    const Eigen::MatrixXd x = random_windows(6, 2, rng);
    const Eigen::MatrixXd y = random_windows(1, 2, rng);
    Rng drop(9);
    const auto masks = forward(spec, params, x, Mode::train, &drop).cache.dropout_masks;
    const auto r = gradient_check<double>(spec, params, x, y, 1e-5, 1e-4, &masks);
    CHECK(r.max_relative_error < 1e-5);
}

TEST_CASE("gradient check on a linear network") {
    // Identity gates still multiply, so the loss is a low-degree polynomial
    // rather than a quadratic; in double the finite differences sit at the
    // rounding floor (~1e-12 absolute), so the tight bound is checked in
    // extended precision.
    for (const auto kind : {CellKind::lstm, CellKind::gru}) {
        auto spec = small_spec(kind, 3);
        spec.window = 2;
        spec.cell_activations = {Activation::identity, Activation::identity};
        spec.dense_activation = Activation::identity;
        Rng init(derive_seed(14, "init"));
        const auto params = init_params<long double>(spec, init);
        Rng rng(79);
        Matrix<long double> x(2, 2), y(1, 2);
        for (Eigen::Index k = 0; k < x.size(); ++k) {
            x.data()[k] = rng.uniform();
        }
        for (Eigen::Index k = 0; k < y.size(); ++k) {
            y.data()[k] = rng.uniform();
        }
        const auto r = gradient_check<long double>(spec, params, x, y, 1e-5L);
        INFO(to_string(kind) << " worst " << r.worst_block << "[" << r.worst_index << "]");
        CHECK(r.max_relative_error < 1e-9);

        Rng init_d(derive_seed(14, "init"));
        const auto pd = init_params<double>(spec, init_d);
        CHECK(gradient_check<double>(spec, pd, x.cast<double>(), y.cast<double>()).max_relative_error < 1e-5);
    }
}

TEST_CASE("templated core runs in single precision") {
    const auto spec = small_spec(CellKind::gru, 4);
    Rng init(derive_seed(1, "init"));
    const auto params = init_params<float>(spec, init);
    Eigen::MatrixXf x = Eigen::MatrixXf::Constant(6, 2, 0.5f);
    const auto out = forward(spec, params, x, Mode::infer);
    CHECK(out.prediction.allFinite());
}

TEST_CASE("parameter count of the default LSTM spec") {
    const auto spec = NetworkSpec::paper(CellKind::lstm);
    // 4*(140*141+140) + 4*(140*280+140) + (140*32+32) + (32+1)
    CHECK(spec.parameter_count() == 241425);
    CHECK(count_parameters(NetworkParams<double>::zeros(spec)) == 241425);
    const auto gru = NetworkSpec::paper(CellKind::gru);
    CHECK(gru.parameter_count() == count_parameters(NetworkParams<double>::zeros(gru)));
}

TEST_CASE("spec validation") {
    auto spec = NetworkSpec::paper(CellKind::lstm);
    spec.units = 0;
    CHECK_THROWS_AS(spec.validate(), Error);
    spec = NetworkSpec::paper(CellKind::lstm);
    spec.dropout_rate = 1.0;
    CHECK_THROWS_AS(spec.validate(), Error);
    CHECK(cell_kind_from_string("gru") == CellKind::gru);
    CHECK_THROWS_AS(cell_kind_from_string("rnn"), Error);
}

TEST_CASE("Glorot init bounds") {
    const auto spec = small_spec(CellKind::lstm, 10);
    Rng init(derive_seed(5, "init"));
    auto params = init_params<double>(spec, init);
    const auto& l1 = std::get<LstmParams<double>>(params.layer1);
    const double a = std::sqrt(6.0 / (10.0 + 11.0));
    CHECK(l1.w_i.cwiseAbs().maxCoeff() <= a);
    CHECK(l1.w_i.cwiseAbs().maxCoeff() > 0.5 * a);
    CHECK(l1.b_f.isZero(0));
}

TEST_CASE("model JSON round trip") {
    const auto spec = small_spec(CellKind::gru, 4);
    Rng init(derive_seed(6, "init"));
    SavedModel model{spec, init_params<double>(spec, init), ScalerParams{0.1, 3.2}, {{"best_epoch", 7}}};
    const auto path = (std::filesystem::temp_directory_path() / "loadcast_model_test.json").string();
    save_model(path, model);
    const auto back = load_model(path);
    std::filesystem::remove(path);
    CHECK(back.spec == spec);
    CHECK(back.scaler == model.scaler);
    CHECK(back.metadata.at("best_epoch") == 7);
    auto a = param_blocks(model.params);
    auto b = param_blocks(const_cast<NetworkParams<double>&>(back.params));
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].name == b[k].name);
        CHECK(Eigen::MatrixXd(a[k].map()) == Eigen::MatrixXd(b[k].map()));
    }
    auto j = model_to_json(model);
    j["version"] = 99;
    CHECK_THROWS_AS(model_from_json(j), Error);
}
