#include <cmath>

#include "doctest.h"
#include "mman/attention.hpp"
#include "mman/errors.hpp"
#include "support/finite_diff.hpp"

using namespace mman;
using mman::test::param_grad_check;

namespace {

Tensor random_vec(int n, Rng& rng) {
    Tensor t = Tensor::zeros({n});
    for (int i = 0; i < n; ++i) t.at(i) = rng.uniform(-2.0, 2.0);
    return t;
}

Tensor random_mat(int r, int c, Rng& rng) {
    Tensor t = Tensor::zeros({r, c});
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform(-1.0, 1.0);
    return t;
}

// hand-built encoder output with explicit states
EncoderOutput fixed_states(Tape& tape, const Tensor& states,
                           const std::vector<std::uint8_t>& mask) {
    EncoderOutput out;
    out.states = tape.leaf(states);
    out.summary = tape.row(out.states, states.rows() - 1);
    out.mask = mask;
    out.labels.assign(static_cast<std::size_t>(states.rows()), "s");
    return out;
}

}  // namespace

TEST_CASE("softmax weights sum to one over the unmasked positions") {
    Rng rng(101);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng.index(6));
        Tensor scores = random_vec(n, rng);
        std::vector<std::uint8_t> mask(static_cast<std::size_t>(n), 0);
        mask[rng.index(static_cast<std::size_t>(n))] = 1;  // at least one live position
        for (auto& m : mask) {
            if (rng.uniform() < 0.6) m = 1;
        }
        Tape tape;
        Var w = tape.masked_softmax(tape.leaf(scores), mask);
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            if (mask[static_cast<std::size_t>(i)]) {
                sum += w.value().at(i);
            } else {
                CHECK(w.value().at(i) == 0.0);
            }
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("softmax ignores a constant shift of the scores") {
    Rng rng(103);
    for (double shift : {1.0, -3.5, 250.0}) {
        Tensor scores = random_vec(5, rng);
        Tensor shifted = scores;
        for (int i = 0; i < 5; ++i) shifted.at(i) += shift;
        std::vector<std::uint8_t> mask = {1, 1, 0, 1, 1};
        Tape tape;
        Var a = tape.masked_softmax(tape.leaf(scores), mask);
        Var b = tape.masked_softmax(tape.leaf(shifted), mask);
        CHECK(a.value().max_abs_diff(b.value()) < 1e-10);
    }
}

TEST_CASE("softmax over equal scores is uniform") {
    Tape tape;
    Var w = tape.masked_softmax(tape.leaf(Tensor::vector({0.7, 0.7, 0.7, 0.7})), {1, 1, 1, 1});
    for (int i = 0; i < 4; ++i) CHECK(w.value().at(i) == doctest::Approx(0.25).epsilon(1e-12));

    Var partial = tape.masked_softmax(tape.leaf(Tensor::vector({0.7, 0.7, 0.7, 0.7})), {1, 0, 1, 0});
    CHECK(partial.value().at(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(partial.value().at(2) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("softmax attention reweights states and respects the mask") {
    const int n = 4, hidden = 3;
    ParameterSet ps(Precision::f64);
    create_attention_params(ps, "att", hidden, 7);
    Rng rng(107);
    Tensor states = random_mat(n, hidden, rng);
    std::vector<std::uint8_t> mask = {1, 1, 1, 0};

    Tape tape;
    ParamVars pv(tape, ps);
    EncoderOutput enc = fixed_states(tape, states, mask);
    AttentionResult res = attend_softmax(pv, "att", enc);

    const Tensor& w = res.weights.value();
    CHECK(w.at(3) == 0.0);
    double sum = w.at(0) + w.at(1) + w.at(2);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));

    // attended vector must be the weighted state sum
    for (int k = 0; k < hidden; ++k) {
        double expect = 0.0;
        for (int i = 0; i < n; ++i) expect += w.at(i) * states.at(i, k);
        CHECK(res.attended.value().at(k) == doctest::Approx(expect).epsilon(1e-12));
    }

    // weights follow the projected scores: recompute them directly
    const Tensor& proj = ps.at("att.proj");
    const Tensor& ctx = ps.at("att.ctx");
    std::vector<double> scores(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < hidden; ++k) {
            double p = 0.0;
            for (int j = 0; j < hidden; ++j) p += states.at(i, j) * proj.at(j, k);
            scores[static_cast<std::size_t>(i)] += p * ctx.at(k);
        }
    }
    double z = 0.0;
    for (int i = 0; i < 3; ++i) z += std::exp(scores[static_cast<std::size_t>(i)]);
    for (int i = 0; i < 3; ++i) {
        CHECK(w.at(i) ==
              doctest::Approx(std::exp(scores[static_cast<std::size_t>(i)]) / z).epsilon(1e-9));
    }
}

TEST_CASE("sigmoid attention gates lie strictly inside (0, 1)") {
    ParameterSet ps(Precision::f64);
    create_attention_params(ps, "att", 3, 11);
    Rng rng(109);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng.index(5));
        Tensor states = random_mat(n, 3, rng);
        Tape tape;
        ParamVars pv(tape, ps);
        EncoderOutput enc = fixed_states(tape, states, std::vector<std::uint8_t>(
                                                           static_cast<std::size_t>(n), 1));
        AttentionResult res = attend_sigmoid(pv, "att", enc);
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            CHECK(res.weights.value().at(i) > 0.0);
            CHECK(res.weights.value().at(i) < 1.0);
            sum += res.weights.value().at(i);
        }
        // no normalization constraint: the gates are independent
        for (int k = 0; k < 3; ++k) {
            double expect = 0.0;
            for (int i = 0; i < n; ++i) expect += res.weights.value().at(i) * states.at(i, k);
            CHECK(res.attended.value().at(k) == doctest::Approx(expect).epsilon(1e-12));
        }
        (void)sum;
    }
}

TEST_CASE("fusion treats a disabled modality as an explicit zero block") {
    const int hidden = 3, common = 2;
    ParameterSet ps(Precision::f64);
    create_fusion_params(ps, hidden, common, 13);
    Rng rng(113);
    Tensor a = random_vec(hidden, rng);
    Tensor c = random_vec(hidden, rng);

    Tape t1;
    ParamVars p1(t1, ps);
    Var merged_missing =
        fuse_modalities(p1, {t1.leaf(a), Var{}, t1.leaf(c)}, hidden);

    Tape t2;
    ParamVars p2(t2, ps);
    Var merged_zero = fuse_modalities(
        p2, {t2.leaf(a), t2.leaf(Tensor::zeros({hidden})), t2.leaf(c)}, hidden);

    CHECK(merged_missing.value().max_abs_diff(merged_zero.value()) == 0.0);

    // and the result is exactly the linear map over the concatenation
    const Tensor& w = ps.at("fuse.w");
    for (int r = 0; r < common; ++r) {
        double expect = 0.0;
        for (int k = 0; k < hidden; ++k) {
            expect += w.at(r, k) * a.at(k);
            expect += w.at(r, 2 * hidden + k) * c.at(k);
        }
        CHECK(merged_missing.value().at(r) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("forcing a one-hot weight on the summary recovers the plain-summary path") {
    const int n = 4, hidden = 3, common = 2;
    ParameterSet ps(Precision::f64);
    create_fusion_params(ps, hidden, common, 17);
    Rng rng(127);
    Tensor states = random_mat(n, hidden, rng);

    Tape tape;
    ParamVars pv(tape, ps);
    EncoderOutput enc = fixed_states(tape, states, std::vector<std::uint8_t>(n, 1));

    // attention path with the weights pinned to the summary element
    Tensor onehot = Tensor::zeros({n});
    onehot.at(n - 1) = 1.0;
    Var attended = tape.matmul(tape.leaf(onehot), enc.states);
    Var with_attention = fuse_modalities(pv, {attended, Var{}, Var{}}, hidden);
    Var without_attention = fuse_modalities(pv, {enc.summary, Var{}, Var{}}, hidden);

    CHECK(with_attention.value().max_abs_diff(without_attention.value()) == 0.0);
}

TEST_CASE("finite differences pass through attention and fusion") {
    const int n = 4, hidden = 3, common = 2;
    ParameterSet ps(Precision::f64);
    create_attention_params(ps, "att.a", hidden, 19);
    create_attention_params(ps, "att.b", hidden, 23);
    create_fusion_params(ps, hidden, common, 29);
    Rng rng(131);
    Tensor states_a = random_mat(n, hidden, rng);
    Tensor states_b = random_mat(n - 1, hidden, rng);
    Tensor dir = random_vec(common, rng);

    auto r = param_grad_check(ps, [&](ParamVars& pv) {
        Tape& t = pv.tape();
        EncoderOutput ea = fixed_states(t, states_a, {1, 1, 0, 1});
        EncoderOutput eb = fixed_states(t, states_b, {1, 1, 1});
        Var va = attend_softmax(pv, "att.a", ea).attended;
        Var vb = attend_sigmoid(pv, "att.b", eb).attended;
        Var fused = fuse_modalities(pv, {va, vb, Var{}}, hidden);
        return t.sum_all(t.mul(fused, t.leaf(dir)));
    });
    CHECK(r.worst_rel < 1e-4);
}
