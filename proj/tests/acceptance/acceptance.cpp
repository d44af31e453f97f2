// Copyright 2026 The simqppo Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// Acceptance harness: one PASS/FAIL line per criterion. Tolerances are pinned
// below; the desk-scale checks train on configs/desk.json.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "simqppo/experiment.hpp"
#include "support.hpp"

using namespace simqppo;
using simqppo::testing::random_rmatrix;

namespace {

// Pinned tolerances and budgets.
constexpr double kUnitaryTol = 1e-10;
constexpr double kNormTol = 1e-10;
constexpr double kShiftTol = 1e-8;
constexpr double kFdRelTol = 1e-5;
constexpr double kHybridRelTol = 1e-4;
constexpr double kPhysicsRelTol = 1e-12;
constexpr double kCovFrobTol = 0.05;
constexpr double kCsiTol = 0.10;
constexpr double kGaeTol = 1e-10;
constexpr double kBanditReward = -0.1;
constexpr double kRandomGap = 1.15;
constexpr double kQuantumRatio = 0.95;
constexpr double kJainFloor = 0.6;
constexpr double kScalarTol = 1e-10;
constexpr double kQuantumBudget = 10.0;
constexpr double kGradientBudget = 120.0;
constexpr double kPhysicsBudget = 60.0;
constexpr double kRlBudget = 300.0;
constexpr double kDeskBudget = 45.0 * 60.0;

// Collects failures for one criterion.
struct Check {
    bool ok = true;
    std::vector<std::string> notes;

    void expect(bool cond, const std::string &what) {
        if (!cond) {
            ok = false;
            notes.push_back(what);
        }
    }
    void note(const std::string &s) { notes.push_back(s); }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int failures = 0;

void run(int id, const std::string &name, double budget, const std::function<void(Check &)> &body) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception &e) {
        c.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.expect(secs < budget, "runtime " + fmt(secs) + " s over budget " + fmt(budget) + " s");
    failures += c.ok ? 0 : 1;
    std::ostringstream line;
    line << "[" << (c.ok ? "PASS" : "FAIL") << "] " << id << " " << name << " (" << fmt(secs) << " s)";
    for (const auto &n : c.notes) {
        line << "; " << n;
    }
    std::cout << line.str() << std::endl;
}

double gate_unitarity_error(const quantum::Gate &g) {
    // Columns (g0, g2) and (g1, g3).
    const Complex c00 = std::conj(g[0]) * g[0] + std::conj(g[2]) * g[2];
    const Complex c01 = std::conj(g[0]) * g[1] + std::conj(g[2]) * g[3];
    const Complex c11 = std::conj(g[1]) * g[1] + std::conj(g[3]) * g[3];
    return std::max({std::abs(c00 - 1.0), std::abs(c01), std::abs(c11 - 1.0)});
}

quantum::QuantumState basis_state(int q, std::size_t b) {
    std::vector<Complex> a(std::size_t{1} << q, Complex{0.0, 0.0});
    a[b] = 1.0;
    return quantum::QuantumState(std::move(a));
}

// ---------------------------------------------------------------------------

void quantum_suite(Check &c) {
    using namespace quantum;
    Rng rng(11);
    std::uniform_real_distribution<double> ang(-4 * kPi, 4 * kPi);
    double worst = 0.0;
    for (int i = 0; i < 2000; ++i) {
        worst = std::max({worst, gate_unitarity_error(ry(ang(rng))), gate_unitarity_error(rz(ang(rng)))});
    }
    worst = std::max(worst, gate_unitarity_error(hadamard()));
    c.expect(worst <= kUnitaryTol, "gate unitarity " + fmt(worst));

    // Dense circuit unitary from basis-state images.
    double dense = 0.0;
    for (int q = 1; q <= 4; ++q) {
        const PqcParameters p = PqcParameters::initial(q, 3, 1, rng);
        const RVector x = random_rmatrix(q, 1, rng, -kPi, kPi).col(0);
        const std::size_t dim = std::size_t{1} << q;
        CMatrix u(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
        for (std::size_t b = 0; b < dim; ++b) {
            QuantumState s = basis_state(q, b);
            for (int i = 0; i < q; ++i) {
                s.apply(hadamard(), i);
            }
            for (int j = 0; j < p.num_layers; ++j) {
                apply_encoding_block(s, p, j, x);
                apply_variational_block(s, p, j);
                apply_entangling_block(s);
            }
            for (std::size_t r = 0; r < dim; ++r) {
                u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(b)) = s[r];
            }
        }
        dense = std::max(dense, (u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff());
    }
    c.expect(dense <= kUnitaryTol, "dense circuit unitarity " + fmt(dense));

    double drift = 0.0;
    for (int q = 1; q <= 8; ++q) {
        const PqcParameters p = PqcParameters::initial(q, 5, 1, rng);
        const RVector x = random_rmatrix(q, 1, rng, -kPi, kPi).col(0);
        QuantumState s(q);
        for (int i = 0; i < q; ++i) {
            s.apply(hadamard(), i);
        }
        for (int j = 0; j < p.num_layers; ++j) {
            apply_encoding_block(s, p, j, x);
            apply_variational_block(s, p, j);
            apply_entangling_block(s);
            drift = std::max(drift, std::abs(s.norm() - 1.0));
        }
        (void)run_pqc(p, x);
    }
    c.expect(drift <= kNormTol, "norm drift " + fmt(drift));

    QuantumState s(4);
    for (int i = 0; i < 4; ++i) {
        s.apply(ry(ang(rng)), i);
        s.apply(rz(ang(rng)), i);
    }
    const QuantumState twice = apply_cz(apply_cz(s, 1, 2), 1, 2);
    double inv = 0.0;
    for (std::size_t i = 0; i < s.dim(); ++i) {
        inv = std::max(inv, std::abs(twice[i] - s[i]));
    }
    c.expect(inv == 0.0, "CZ involution " + fmt(inv));

    const QuantumState one = apply_1q(QuantumState(1), ry(kPi), 0);
    c.expect(std::abs(one[0]) <= 1e-15 && std::abs(one[1] - Complex(1.0, 0.0)) <= 1e-15,
             "RY(pi)|0> != |1>");
}

// ---------------------------------------------------------------------------

double weighted_output(const quantum::PqcParameters &p, const quantum::PolicyConfig &pol,
                       const RVector &x, const RVector &up) {
    return up.dot(quantum::measure(quantum::run_pqc(p, x), p, pol));
}

void check_hybrid(Check &c) {
    const ExperimentConfig desk = load_config(std::string(SIMQPPO_SOURCE_DIR) + "/configs/desk.json");
    ExperimentConfig cfg = desk;
    cfg.agent.kind = "quantum";
    const int sdim = 2 * cfg.geometry.atoms_per_layer * (cfg.geometry.num_users + 1);
    const int adim = cfg.geometry.num_users + cfg.geometry.atoms_per_layer * cfg.geometry.num_layers;
    Rng rng(21);
    auto actor = ppo::make_actor(cfg.agent_spec(), sdim, adim, rng);
    for (RMatrix *p : actor->parameters()) {
        *p += 0.1 * random_rmatrix(p->rows(), p->cols(), rng);
    }
    const int batch = 6;
    const RVector log_std = RVector::Constant(adim, -0.3);
    ppo::Minibatch mb;
    mb.states = random_rmatrix(sdim, batch, rng);
    const RMatrix means = actor->mean(mb.states);
    mb.actions = means + random_rmatrix(adim, batch, rng);
    mb.old_log_probs.resize(batch);
    for (int i = 0; i < batch; ++i) {
        const RVector shifted = means.col(i) + 0.15 * random_rmatrix(adim, 1, rng).col(0);
        mb.old_log_probs(i) = ppo::gaussian_log_prob(mb.actions.col(i), shifted, log_std);
    }
    mb.advantages = ppo::normalize_advantages(random_rmatrix(batch, 1, rng).col(0));
    mb.returns = random_rmatrix(batch, 1, rng).col(0);
    const RVector values = random_rmatrix(batch, 1, rng).col(0);
    const ppo::PpoHyper hyper;

    nn::Gradients grads;
    actor->mean_with_gradients(
        mb.states,
        [&](const RMatrix &m) { return ppo::ppo_losses(mb, m, log_std, values, hyper).d_mean; },
        grads);
    const auto params = actor->parameters();
    const auto total = [&] {
        return ppo::ppo_losses(mb, actor->mean(mb.states), log_std, values, hyper).terms.total;
    };
    const double h = 1e-6;
    double worst = 0.0;
    int checked = 0;
    for (std::size_t t = 0; t < params.size(); ++t) {
        const Eigen::Index n = params[t]->size();
        const Eigen::Index stride = std::max<Eigen::Index>(1, n / 40);
        for (Eigen::Index k = static_cast<Eigen::Index>(t) % stride; k < n; k += stride) {
            double &v = params[t]->data()[k];
            const double keep = v;
            v = keep + h;
            const double lp = total();
            v = keep - h;
            const double lm = total();
            v = keep;
            const double fd = (lp - lm) / (2 * h);
            const double g = grads[t].data()[k];
            const double scale = std::max(std::abs(g), std::abs(fd));
            if (scale > 1e-8) {
                worst = std::max(worst, std::abs(g - fd) / scale);
            }
            ++checked;
        }
    }
    c.expect(worst <= kHybridRelTol, "hybrid actor rel err " + fmt(worst));
    c.note("hybrid coords " + std::to_string(checked) + ", worst rel " + fmt(worst));
}

void gradient_suite(Check &c) {
    using namespace quantum;
    Rng rng(12);
    const int q = 4;
    const int layers = 3;
    const int outputs = 3;
    PqcParameters p = PqcParameters::initial(q, layers, outputs, rng);
    p.input_scales = random_rmatrix(layers, 2 * q, rng, 0.5, 1.5);
    p.observable_weights = random_rmatrix(outputs, q, rng);
    const PolicyConfig pol = PolicyConfig::pauli_z(q, outputs);
    const RVector x = random_rmatrix(q, 1, rng, -kPi, kPi).col(0);
    const RVector up = random_rmatrix(outputs, 1, rng).col(0);
    const PqcGradients g = pqc_backward(p, pol, x, up);

    double shift = 0.0;
    for (Eigen::Index k = 0; k < p.rotation_angles.size(); ++k) {
        PqcParameters a = p;
        PqcParameters b = p;
        a.rotation_angles.data()[k] += 0.5 * kPi;
        b.rotation_angles.data()[k] -= 0.5 * kPi;
        const double ps = 0.5 * (weighted_output(a, pol, x, up) - weighted_output(b, pol, x, up));
        shift = std::max(shift, std::abs(ps - g.rotation_angles.data()[k]));
    }
    c.expect(shift <= kShiftTol, "parameter shift abs " + fmt(shift));

    const double h = 1e-5;
    const auto rel = [](double a, double b) {
        return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
    };
    double fd_worst = 0.0;
    for (Eigen::Index k = 0; k < p.input_scales.size(); ++k) {
        PqcParameters a = p;
        PqcParameters b = p;
        a.input_scales.data()[k] += h;
        b.input_scales.data()[k] -= h;
        const double fd = (weighted_output(a, pol, x, up) - weighted_output(b, pol, x, up)) / (2 * h);
        fd_worst = std::max(fd_worst, rel(fd, g.input_scales.data()[k]));
    }
    for (Eigen::Index k = 0; k < p.observable_weights.size(); ++k) {
        PqcParameters a = p;
        PqcParameters b = p;
        a.observable_weights.data()[k] += h;
        b.observable_weights.data()[k] -= h;
        const double fd = (weighted_output(a, pol, x, up) - weighted_output(b, pol, x, up)) / (2 * h);
        fd_worst = std::max(fd_worst, rel(fd, g.observable_weights.data()[k]));
    }
    c.expect(fd_worst <= kFdRelTol, "finite difference rel " + fmt(fd_worst));
    c.note("shift abs " + fmt(shift) + ", fd rel " + fmt(fd_worst));
    check_hybrid(c);
}

// ---------------------------------------------------------------------------

Complex coefficient_oracle(double r, double area, double gap, double lambda) {
    const double amp = area * gap / (r * r);
    const double ph = 2.0 * kPi * r / lambda;
    const double re = 1.0 / (2.0 * kPi * r);
    const double im = -1.0 / lambda;
    return {amp * (re * std::cos(ph) - im * std::sin(ph)), amp * (re * std::sin(ph) + im * std::cos(ph))};
}

void physics_suite(Check &c) {
    // Hand geometry: 3x3 atoms, spacing 5 mm, two layers 25 mm apart.
    SimGeometry g;
    g.num_layers = 2;
    g.atoms_per_layer = 9;
    g.num_antennas = 2;
    g.num_users = 2;
    g.wavelength = 0.01;
    g.atom_spacing = 0.005;
    g.total_thickness = 0.05;
    g.atom_area = 2.5e-5;
    const PropagationMatrices props = build_propagation_matrices(g);
    double worst = 0.0;
    // Atom (x, z) positions on a 3x3 grid; antennas along z, centred on the
    // array, half a wavelength apart.
    const auto pos = [](int n) { return std::pair{(n - 1) % 3 + 1, (n - 1) / 3 + 1}; };
    for (int n = 1; n <= 9; ++n) {
        for (int k = 1; k <= 2; ++k) {
            const auto [nx, nz] = pos(n);
            const double dx = (nx - 2) * 0.005;
            const double dz = (nz - 2) * 0.005 - (k - 1.5) * 0.005;
            const double r = std::sqrt(dx * dx + dz * dz + 0.025 * 0.025);
            const Complex o = coefficient_oracle(r, g.atom_area, 0.025, g.wavelength);
            worst = std::max(worst, std::abs(props.antenna_to_first(n - 1, k - 1) - o) / std::abs(o));
        }
        for (int m = 1; m <= 9; ++m) {
            const auto [ax, az] = pos(n);
            const auto [bx, bz] = pos(m);
            const double r = std::sqrt(std::pow((ax - bx) * 0.005, 2) + std::pow((az - bz) * 0.005, 2) +
                                       0.025 * 0.025);
            const Complex o = coefficient_oracle(r, g.atom_area, 0.025, g.wavelength);
            worst = std::max(worst, std::abs(props.inter_layer[0](n - 1, m - 1) - o) / std::abs(o));
        }
    }
    // Centre atom of a 5x5 layer, K=4, k=2, d = 5 lambda / 3: only the antenna
    // offset lambda/2 * (2 - 2.5) remains.
    const SimGeometry big = SimGeometry::with_wavelength(10.7e-3, 3, 25, 4, 3);
    const double lam = 10.7e-3;
    const double hand = std::sqrt(std::pow(0.25 * lam, 2) + std::pow(5.0 * lam / 3.0, 2));
    worst = std::max(worst, std::abs(antenna_to_layer_distance(2, 13, big) - hand) / hand);
    c.expect(worst <= kPhysicsRelTol, "propagation coefficients rel " + fmt(worst));

    double min_eig = 0.0;
    for (int atoms : {4, 9, 16, 25, 36, 49}) {
        SimGeometry dense = simqppo::testing::small_geometry(2, atoms, 2, 2);
        dense.atom_spacing = 0.25 * dense.wavelength;
        for (const SimGeometry &geo : {simqppo::testing::small_geometry(2, atoms, 2, 2), dense}) {
            const CorrelationFactor cf(geo);
            Eigen::SelfAdjointEigenSolver<RMatrix> eig(cf.clipped());
            min_eig = std::min(min_eig, eig.eigenvalues().minCoeff());
        }
    }
    c.expect(min_eig >= -1e-12, "clipped correlation min eigenvalue " + fmt(min_eig));

    const SimGeometry sg = simqppo::testing::small_geometry(2, 9, 2, 2);
    const CorrelationFactor corr(sg);
    Rng rng(2024);
    CMatrix acc = CMatrix::Zero(9, 9);
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        const CVector h = rician_channel(1.0, 0.0, CVector::Zero(9), corr, rng);
        acc += h * h.adjoint();
    }
    acc /= static_cast<double>(draws);
    const double cov = (acc - corr.correlation().cast<Complex>()).norm() / corr.correlation().norm();
    c.expect(cov <= kCovFrobTol, "NLoS covariance rel Frobenius " + fmt(cov));

    const double delta = 0.1;
    double rel_power = 0.0;
    for (int i = 0; i < draws; ++i) {
        const CVector h = simqppo::testing::random_cvector(25, rng, 1e-4);
        rel_power += corrupt_eve_csi(h, delta, rng).error.squaredNorm() / h.squaredNorm();
    }
    rel_power /= draws;
    c.expect(std::abs(rel_power / (delta * delta) - 1.0) <= kCsiTol,
             "Eve CSI relative error " + fmt(rel_power));
    c.note("coef rel " + fmt(worst) + ", cov " + fmt(cov) + ", csi " + fmt(rel_power));
}

// ---------------------------------------------------------------------------

void rl_suite(Check &c) {
    Rng rng(31);
    std::bernoulli_distribution done(0.15);
    double gae = 0.0;
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 1 + trial;
        const RVector r = random_rmatrix(n, 1, rng).col(0);
        const RVector v = random_rmatrix(n, 1, rng).col(0);
        std::vector<std::uint8_t> d(static_cast<std::size_t>(n));
        for (auto &x : d) {
            x = done(rng) ? 1 : 0;
        }
        const double last = 0.7;
        const double gamma = 0.99;
        const double lambda = 0.95;
        const ppo::GaeResult res = ppo::compute_gae(r, v, d, last, gamma, lambda);
        for (int t = 0; t < n; ++t) {
            double sum = 0.0;
            double w = 1.0;
            for (int i = t; i < n; ++i) {
                const bool end = d[static_cast<std::size_t>(i)] != 0;
                const double next = end ? 0.0 : (i + 1 < n ? v(i + 1) : last);
                sum += w * (r(i) + gamma * next - v(i));
                if (end) {
                    break;
                }
                w *= gamma * lambda;
            }
            gae = std::max(gae, std::abs(sum - res.advantages(t)));
        }
    }
    c.expect(gae <= kGaeTol, "GAE vs brute force " + fmt(gae));

    c.expect(ppo::clip_ratio(1.5, 0.2) == 1.2 && ppo::clip_ratio(0.5, 0.2) == 0.8 &&
                 ppo::clip_ratio(1.1, 0.2) == 1.1 && ppo::clip_ratio(1.2, 0.2) == 1.2 &&
                 ppo::clip_ratio(0.8, 0.2) == 0.8,
             "clip table");

    const RVector r = random_rmatrix(10, 1, rng).col(0);
    const RVector v = random_rmatrix(10, 1, rng).col(0);
    const std::vector<std::uint8_t> none(10, 0);
    const ppo::GaeResult td = ppo::compute_gae(r, v, none, 0.2, 0.9, 0.0);
    const ppo::GaeResult my = ppo::compute_gae(r, v, none, 0.2, 0.0, 0.95);
    bool exact = true;
    for (int t = 0; t < 10; ++t) {
        const double next = t + 1 < 10 ? v(t + 1) : 0.2;
        exact = exact && td.advantages(t) == r(t) + 0.9 * next - v(t);
        exact = exact && my.advantages(t) == r(t) - v(t);
    }
    c.expect(exact, "degenerate GAE identities");

    std::string rewards;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        ppo::TrainOptions opts;
        opts.agent.kind = ppo::AgentKind::classical;
        opts.agent.actor_hidden = {64, 64};
        opts.agent.critic_hidden = {64, 64};
        opts.total_steps = 20480;
        opts.seed = seed;
        const auto tr = ppo::train([] { return std::make_unique<TargetBanditEnv>(0.5); }, opts);
        TargetBanditEnv env(0.5);
        const double rew = ppo::evaluate_policy(*tr.agent, env, 10, 77).mean_reward;
        c.expect(rew > kBanditReward, "bandit seed " + std::to_string(seed) + " reward " + fmt(rew));
        rewards += (rewards.empty() ? "" : "/") + fmt(rew);
    }
    c.note("bandit rewards " + rewards);
}

// ---------------------------------------------------------------------------

struct DeskResults {
    std::vector<double> asr[3]; // random, classical, quantum
    std::vector<double> jain_trained;
    double min_jain = 1.0;
    int users = 0;
    bool done = false;
};

DeskResults &desk() {
    static DeskResults r;
    if (r.done) {
        return r;
    }
    const ExperimentConfig base = load_config(std::string(SIMQPPO_SOURCE_DIR) + "/configs/desk.json");
    r.users = base.geometry.num_users;
    const char *kinds[3] = {"random", "classical", "quantum"};
    for (int s = 0; s < base.run.train_seeds; ++s) {
        for (int k = 0; k < 3; ++k) {
            ExperimentConfig cfg = base;
            cfg.agent.kind = kinds[k];
            cfg.run.seed = base.run.seed + static_cast<std::uint64_t>(s);
            const auto t0 = std::chrono::steady_clock::now();
            const auto tr = ppo::train(make_env_factory(cfg), cfg.train_options());
            const auto rep = cmd_eval(cfg, *tr.agent, cfg.run.eval_episodes, cfg.run.eval_seed);
            r.asr[k].push_back(rep.mean_asr);
            if (k > 0) {
                r.jain_trained.push_back(rep.mean_jain);
            }
            for (double j : rep.episode_jain) {
                r.min_jain = std::min(r.min_jain, j);
            }
            std::cerr << "  desk " << kinds[k] << " seed " << cfg.run.seed << ": asr "
                      << fmt(rep.mean_asr) << " jain " << fmt(rep.mean_jain) << " ("
                      << fmt(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count())
                      << " s)\n";
        }
    }
    r.done = true;
    return r;
}

void secrecy_trend(Check &c) {
    const DeskResults &d = desk();
    const double rnd = median(d.asr[0]);
    const double cls = median(d.asr[1]);
    const double qnt = median(d.asr[2]);
    c.expect(cls >= kRandomGap * rnd, "classical " + fmt(cls) + " < 1.15 x random " + fmt(rnd));
    c.expect(qnt >= kRandomGap * rnd, "quantum " + fmt(qnt) + " < 1.15 x random " + fmt(rnd));
    c.note("median ASR random " + fmt(rnd) + ", classical " + fmt(cls) + " (" + fmt(cls / rnd) +
           "x), quantum " + fmt(qnt) + " (" + fmt(qnt / rnd) + "x)");
}

void quantum_viability(Check &c) {
    const DeskResults &d = desk();
    const double cls = median(d.asr[1]);
    const double qnt = median(d.asr[2]);
    c.expect(qnt >= kQuantumRatio * cls, "quantum/classical " + fmt(qnt / cls));
    c.note("quantum/classical median ASR " + fmt(qnt / cls));
}

void fairness(Check &c) {
    const DeskResults &d = desk();
    const ExperimentConfig base = load_config(std::string(SIMQPPO_SOURCE_DIR) + "/configs/desk.json");
    c.expect(base.env.min_rate > 0.0, "desk profile has no active QoS constraint");
    const double med = median(d.jain_trained);
    c.expect(med >= kJainFloor, "median Jain " + fmt(med));
    c.expect(d.min_jain >= 1.0 / d.users - 1e-12, "Jain below 1/M: " + fmt(d.min_jain));
    c.note("median Jain (trained) " + fmt(med) + ", min episode Jain " + fmt(d.min_jain));
}

// ---------------------------------------------------------------------------

void scalar_oracle(Check &c) {
    const SimGeometry g = SimGeometry::with_wavelength(10.7e-3, 1, 1, 1, 1);
    const ChannelParams params;
    SecrecyEnv env(g, params, EnvConfig{});
    double spread = 0.0;
    double closed = 0.0;
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const EnvState s = env.reset(seed);
        const double w2 = std::norm(env.propagation().antenna_to_first(0, 0));
        const double p0 = env.config().max_power;
        const double hu = std::norm(s.raw_channels.h_users[0](0));
        const double he = std::norm(s.raw_channels.h_eve_est(0));
        const double dh = std::norm(s.raw_channels.h_eve_err(0));
        const double gu = hu * w2 * p0 / params.noise_power_user;
        const double ge = he * w2 * p0 / (dh * w2 * p0 + params.noise_power_eve);
        const double expected = std::max(0.0, std::log2(1 + gu) - std::log2(1 + ge));
        double lo = 1e300;
        double hi = -1e300;
        for (int i = 0; i < 64; ++i) {
            const double theta = kTwoPi * (i + 0.5) / 64.0;
            RVector raw(2);
            raw << -0.7, std::atanh(theta / kPi - 1.0);
            const StepOutcome o = env.step(as_span(raw));
            lo = std::min(lo, o.reward);
            hi = std::max(hi, o.reward);
            closed = std::max(closed, std::abs(o.reward - expected) / std::max(1.0, expected));
            if (o.done) {
                env.reset(seed);
            }
        }
        spread = std::max(spread, hi - lo);
    }
    c.expect(spread <= kScalarTol, "phase spread " + fmt(spread));
    c.expect(closed <= kScalarTol, "closed form mismatch " + fmt(closed));
    c.note("spread " + fmt(spread) + ", closed-form err " + fmt(closed));
}

void reproducibility(Check &c) {
    ExperimentConfig cfg = load_config(std::string(SIMQPPO_SOURCE_DIR) + "/configs/tiny.json");
    const auto dir = std::filesystem::temp_directory_path() /
                     ("simqppo_accept_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    const auto read = [](const std::string &p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream os;
        os << in.rdbuf();
        return os.str();
    };
    for (const char *kind : {"classical", "quantum"}) {
        cfg.agent.kind = kind;
        const auto a = cmd_train(cfg, (dir / (std::string(kind) + "_a")).string());
        const auto b = cmd_train(cfg, (dir / (std::string(kind) + "_b")).string());
        const std::string ta = strip_timing_columns(read(a.metrics_path));
        const std::string tb = strip_timing_columns(read(b.metrics_path));
        c.expect(!ta.empty() && ta == tb, std::string(kind) + " metrics differ");
    }
    std::error_code ec;
    std::filesystem::remove_all(dir, ec);
}

} // namespace

int main() {
    std::cout << "simqppo acceptance" << std::endl;
    run(1, "quantum correctness suite", kQuantumBudget, quantum_suite);
    run(2, "gradient suite", kGradientBudget, gradient_suite);
    run(3, "physics suite", kPhysicsBudget, physics_suite);
    run(4, "RL machinery suite", kRlBudget, rl_suite);
    const auto t0 = std::chrono::steady_clock::now();
    run(5, "secrecy trend vs random (desk)", kDeskBudget, secrecy_trend);
    const double remaining =
        kDeskBudget - std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    run(6, "Q-PPO viability vs PPO (desk)", remaining, quantum_viability);
    run(7, "fairness under QoS (desk)", remaining, fairness);
    run(8, "scalar oracle equivalence", 60.0, scalar_oracle);
    run(9, "reproducibility", 300.0, reproducibility);
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
