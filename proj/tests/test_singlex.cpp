#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "spinlens/error.hpp"
#include "spinlens/propagator.hpp"
#include "spinlens/singlex.hpp"

using namespace spinlens;
using cd = std::complex<double>;

namespace {

std::shared_ptr<const SiteTable> chain(int n) { return std::make_shared<const SiteTable>(build_lattice(1, {n, 1, 1})); }

SpinWaveState state_from(std::shared_ptr<const SiteTable> t, Eigen::VectorXcd v)
{
    SpinWaveState s;
    s.table = std::move(t);
    s.amplitudes = std::move(v);
    return s;
}

/// Random displaced power-law chain (or 2D patch) with a random diagonal and possibly a hole.
HamiltonianTerms random_terms(std::mt19937_64& rng, int variant)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    SiteTable base = variant % 2 == 0 ? build_lattice(1, {12, 1, 1}) : build_lattice(2, {3, 4, 1});
    if (variant % 3 == 2) {
        const std::vector<std::size_t> hole{5};
        base = punch_holes(base, hole);
    }
    std::vector<Vec3> d(base.size());
    for (auto& v : d)
        v = {0.1 * u(rng), base.dimension() > 1 ? 0.1 * u(rng) : 0.0, 0.0};
    auto t = std::make_shared<const SiteTable>(displace_sites(base, d));
    std::vector<double> eps(t->size());
    for (auto& e : eps)
        e = 2.0 * u(rng);
    const CouplingModel model = variant % 2 == 0 ? CouplingModel{PowerLaw{1.0, 3.0 + variant, 20}}
                                                 : CouplingModel{NearestNeighbor{0.5 + 0.5 * std::abs(u(rng))}};
    return build_couplings(t, model, eps);
}

bool same_density(const SpinWaveState& a, const SpinWaveState& b)
{
    return (a.amplitudes.cwiseAbs() - b.amplitudes.cwiseAbs()).cwiseAbs().maxCoeff() < 1e-15;
}

} // namespace

TEST_SUITE("singlex") {

TEST_CASE("apply_h examples")
{
    const auto t2 = chain(2);
    const auto h2 = build_couplings(t2, NearestNeighbor{0.8}, std::vector<double>(2, 0.0));
    Eigen::VectorXcd e0(2);
    e0 << 1.0, 0.0;
    const auto r = apply_h(h2, e0);
    CHECK(std::abs(r[0]) == 0.0);
    CHECK(r[1].real() == doctest::Approx(-0.8));

    const auto t = chain(20);
    const auto h = build_couplings(t, NearestNeighbor{1.0}, std::vector<double>(20, 0.3));
    const Eigen::VectorXcd flat = Eigen::VectorXcd::Ones(20);
    const auto hf = apply_h(h, flat);
    for (int n = 1; n < 19; ++n)
        CHECK(hf[n].real() == doctest::Approx(0.3 - 2.0));

    std::mt19937_64 rng(3);
    const auto hr = random_terms(rng, 0);
    const auto v = oracle::random_state(hr.dim(), rng);
    const Eigen::VectorXcd dense = oracle::dense(hr.matrix()).cast<cd>() * v;
    CHECK((apply_h(hr, v) - dense).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("two-site exact exponential")
{
    const auto t = chain(2);
    const double j = 1.3;
    const auto h = build_couplings(t, NearestNeighbor{j}, std::vector<double>(2, 0.0));
    Eigen::VectorXcd e0(2);
    e0 << 1.0, 0.0;
    for (double time : {0.0, 0.7, 3.1, 40.0}) {
        const auto out = evolve(h, state_from(t, e0), time, 1e-12);
        Eigen::VectorXcd expect(2);
        expect << std::cos(j * time), cd(0.0, std::sin(j * time));
        CHECK(oracle::amplitude_error(out.amplitudes, expect) < 1e-11);
        CHECK(out.time == time);
    }
}

TEST_CASE("zero time step is the identity")
{
    std::mt19937_64 rng(5);
    const auto h = random_terms(rng, 1);
    const auto v = oracle::random_state(h.dim(), rng);
    const auto out = evolve(h, state_from(h.table, v), 0.0);
    CHECK(out.amplitudes == v);
}

TEST_CASE("evolution matches the dense exponential oracle")
{
    std::mt19937_64 rng(2024);
    for (int variant = 0; variant < 6; ++variant) {
        const auto h = random_terms(rng, variant);
        const auto v = oracle::random_state(h.dim(), rng);
        const Eigen::MatrixXd dense = oracle::dense(h.matrix());
        for (double time : {0.3, 5.0, 37.0}) {
            const auto out = evolve(h, state_from(h.table, v), time, 1e-12);
            const auto ref = oracle::expm_apply(dense, v, time);
            CHECK((out.amplitudes - ref).cwiseAbs().maxCoeff() <= 1e-9);
        }
    }

    SUBCASE("12-site chain with a quadratic potential at Jt = 5")
    {
        const auto t = chain(12);
        std::vector<double> eps(12);
        for (int n = 0; n < 12; ++n)
            eps[static_cast<std::size_t>(n)] = 0.05 * (n - 5.5) * (n - 5.5);
        const auto h = build_couplings(t, NearestNeighbor{}, eps);
        const auto psi = gaussian_packet(t, 2.0, {5.5, 0, 0});
        const auto out = evolve(h, psi, 5.0, 1e-12);
        const auto ref = oracle::expm_apply(oracle::dense(h.matrix()), psi.amplitudes, 5.0);
        CHECK(max_amplitude_error(out.amplitudes, ref) <= 1e-9);
        CHECK(phase_insensitive_distance(out.amplitudes, ref) < 1e-12);
    }
}

TEST_CASE("norm and energy are conserved")
{
    const auto t = chain(400);
    std::vector<double> eps(400);
    for (int n = 0; n < 400; ++n)
        eps[static_cast<std::size_t>(n)] = 1e-4 * (n - 200.0) * (n - 200.0);
    const auto h = build_couplings(t, PowerLaw{1.0, 6.0, 20}, eps);
    const auto psi = gaussian_packet(t, 30.0, {200, 0, 0}, {0.4, 0, 0});
    const double e0 = energy(h, psi);
    const auto bounds = gershgorin_bounds(h.matrix());
    const double hnorm = std::max(std::abs(bounds.lower), std::abs(bounds.upper));
    for (double tol : {1e-6, 1e-10, 1e-13}) {
        const auto out = evolve(h, psi, 500.0, tol);
        CHECK(std::abs(1.0 - out.norm_squared()) <= 10 * tol);
        CHECK(std::abs(energy(h, out) - e0) <= 10 * tol * hnorm);
    }
}

TEST_CASE("tolerance range is enforced")
{
    const auto t = chain(4);
    const auto h = build_couplings(t, NearestNeighbor{}, std::vector<double>(4, 0.0));
    const auto psi = gaussian_packet(t, 1.0, {1.5, 0, 0});
    CHECK_THROWS_AS(evolve(h, psi, 1.0, 1e-15), InvalidSpec);
    CHECK_THROWS_AS(evolve(h, psi, 1.0, 1e-5), InvalidSpec);
    const auto other = chain(5);
    CHECK_THROWS_AS(evolve(h, gaussian_packet(other, 1.0, {2, 0, 0}), 1.0), InvalidSpec);
}

TEST_CASE("parity is preserved for symmetric problems")
{
    const int n = 101;
    const auto t = chain(n);
    std::vector<double> eps(n);
    for (int i = 0; i < n; ++i)
        eps[static_cast<std::size_t>(i)] = 3e-4 * std::pow(i - 50.0, 2) + 1e-7 * std::pow(i - 50.0, 4);
    const auto h = build_couplings(t, PowerLaw{1.0, 4.0, 20}, eps);
    auto psi = gaussian_packet(t, 12.0, {50, 0, 0});
    const std::vector<double> times{3.0, 17.0, 40.0, 90.0};
    double worst = 0.0;
    evolve_sampled(h, psi, times, 1e-12, [&](const SpinWaveState& s) {
        const auto p = excitation_probability(s);
        for (int i = 0; i < n; ++i)
            worst = std::max(worst, std::abs(p[static_cast<std::size_t>(i)] - p[static_cast<std::size_t>(n - 1 - i)]));
    });
    CHECK(worst <= 1e-9);
    CHECK(psi.time == 90.0);
}

TEST_CASE("gaussian packet")
{
    SUBCASE("1D width and realness")
    {
        const auto t = chain(200);
        const auto psi = gaussian_packet(t, 10.0, {100, 0, 0});
        CHECK(psi.norm_squared() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(packet_width(psi) == doctest::Approx(10.0).epsilon(0.02));
        CHECK(rms_spread(psi) == doctest::Approx(10.0 / std::sqrt(2.0)).epsilon(0.02));
        for (const auto& a : psi.amplitudes) {
            CHECK(a.imag() == 0.0);
            CHECK(a.real() > 0.0);
        }
        CHECK(centroid(psi)[0] == doctest::Approx(100.0));
    }
    SUBCASE("2D radial width")
    {
        const auto t = std::make_shared<const SiteTable>(build_lattice(2, {50, 50, 1}));
        const auto psi = gaussian_packet(t, 10.0, {24.5, 24.5, 0});
        CHECK(packet_width(psi) == doctest::Approx(10.0).epsilon(0.02));
        const auto w = axis_widths(psi);
        CHECK(w[0] == doctest::Approx(w[1]));
    }
    SUBCASE("tail loss for a wide packet")
    {
        // Boundary loss at sigma0 = 100a on 800 sites equals erfc(4) of the continuum norm.
        std::vector<std::string> warn;
        gaussian_packet(chain(800), 100.0, {399.5, 0, 0}, {}, &warn);
        CHECK(warn.empty());
        double inside = 0.0, all = 0.0;
        for (int n = -2000; n < 2800; ++n) {
            const double w = std::exp(-std::pow(n - 399.5, 2) / 1e4);
            all += w;
            if (n >= 0 && n < 800)
                inside += w;
        }
        CHECK(1.0 - inside / all == doctest::Approx(std::erfc(4.0)).epsilon(0.02));
    }
    SUBCASE("coarse packets warn, centred wide ones do not")
    {
        std::vector<std::string> warn;
        gaussian_packet(chain(100), 0.3, {50, 0, 0}, {}, &warn);
        CHECK(warn.size() == 1);
        warn.clear();
        gaussian_packet(chain(400), 20.0, {200, 0, 0}, {}, &warn);
        CHECK(warn.empty());
    }
    SUBCASE("invalid input")
    {
        CHECK_THROWS_AS(gaussian_packet(chain(10), 0.0, {5, 0, 0}), InvalidSpec);
        CHECK_THROWS_AS(gaussian_packet(chain(10), 1.0, {12, 0, 0}), InvalidSpec);
    }
    SUBCASE("holes carry no amplitude")
    {
        const std::vector<std::size_t> holes{3, 7};
        const auto t = std::make_shared<const SiteTable>(punch_holes(build_lattice(1, {11, 1, 1}), holes));
        const auto psi = gaussian_packet(t, 2.0, {5, 0, 0});
        CHECK(psi.amplitudes.size() == 9);
        const auto p = excitation_probability(psi);
        CHECK(p[3] == 0.0);
        CHECK(p[7] == 0.0);
    }
}

TEST_CASE("phase imprint")
{
    const auto t = chain(201);
    const auto psi = gaussian_packet(t, 30.0, {100, 0, 0});

    const std::vector<double> flat(201, 0.0);
    CHECK(phase_imprint(psi, flat).amplitudes == psi.amplitudes);

    SUBCASE("parabolic profile gives a linear momentum kick")
    {
        const double phi0 = 0.01;
        std::vector<double> phi(201);
        for (int n = 0; n < 201; ++n)
            phi[static_cast<std::size_t>(n)] = phi0 * (n - 100.0) * (n - 100.0);
        const auto out = phase_imprint(psi, phi);
        for (int n = 60; n < 140; n += 7) {
            // local wavenumber between n and n+1, at offset d = n + 1/2 - 100
            const double k = std::arg(out.amplitudes[n + 1] / out.amplitudes[n]);
            CHECK(k == doctest::Approx(-2.0 * phi0 * (n + 0.5 - 100.0)).epsilon(1e-12));
        }
        CHECK(same_density(out, psi));
    }
    SUBCASE("linear profile is a uniform shift")
    {
        std::vector<double> phi(201);
        for (int n = 0; n < 201; ++n)
            phi[static_cast<std::size_t>(n)] = 0.2 * n;
        const auto out = phase_imprint(psi, phi);
        for (int n = 0; n < 200; n += 13)
            CHECK(std::arg(out.amplitudes[n + 1] / out.amplitudes[n]) == doctest::Approx(-0.2));
        CHECK(same_density(out, psi));
    }
    std::vector<double> bad(201, 0.0);
    bad[4] = INFINITY;
    CHECK_THROWS_AS(phase_imprint(psi, bad), InvalidSpec);
}

TEST_CASE("focus probability and widths")
{
    const auto t = chain(21);
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(21);
    v[10] = 1.0;
    const auto delta = state_from(t, v);
    CHECK(focus_probability(delta, {10, 0, 0}, 0.0) == 1.0);
    CHECK(focus_probability(delta, {10, 0, 0}, 3.0) == 1.0);
    CHECK(packet_width(delta) == 0.0);

    v.setZero();
    v[9] = std::sqrt(0.25);
    v[10] = std::sqrt(0.5);
    v[11] = std::sqrt(0.2);
    v[14] = std::sqrt(0.05);
    const auto spread = state_from(t, v);
    CHECK(focus_probability(spread, {10, 0, 0}, 3.0) == doctest::Approx(0.95));
    CHECK(focus_probability(spread, {10, 0, 0}, 4.0) == doctest::Approx(1.0));
    const double mean = 9 * 0.25 + 10 * 0.5 + 11 * 0.2 + 14 * 0.05;
    const double var = 0.25 * std::pow(9 - mean, 2) + 0.5 * std::pow(10 - mean, 2) + 0.2 * std::pow(11 - mean, 2) +
                       0.05 * std::pow(14 - mean, 2);
    CHECK(rms_spread(spread) == doctest::Approx(std::sqrt(var)));
    CHECK(packet_width(spread) == doctest::Approx(std::sqrt(2 * var)));
    const double var10 = 0.25 + 0.2 + 0.05 * 16;
    CHECK(packet_width_about(spread, {10, 0, 0}) == doctest::Approx(std::sqrt(2 * var10)));
}

TEST_CASE("lattice Wigner function")
{
    SUBCASE("localised state")
    {
        const auto t = chain(9);
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(9);
        v[4] = 1.0;
        const auto g = wigner_lattice(state_from(t, v));
        CHECK(g.max_imaginary < 1e-10);
        for (Eigen::Index j = 0; j < g.values.cols(); ++j) {
            CHECK(g.values(4, j) == doctest::Approx(1.0 / (2 * std::numbers::pi)).epsilon(1e-12));
            CHECK(std::abs(g.values(3, j)) < 1e-12);
            CHECK(std::abs(g.values(6, j)) < 1e-12);
        }
    }
    SUBCASE("marginal and realness for a random state")
    {
        std::mt19937_64 rng(17);
        const auto t = chain(24);
        const auto psi = state_from(t, oracle::random_state(24, rng));
        const auto g = wigner_lattice(psi, 150);
        CHECK(g.values.cols() % 4 == 0);
        CHECK(g.max_imaginary < 1e-10);
        const auto p = excitation_probability(psi);
        for (Eigen::Index i = 0; i < 24; ++i)
            CHECK(std::abs(g.values.row(i).sum() * g.dk - p[static_cast<std::size_t>(i)]) < 1e-6);
    }
    SUBCASE("wide Gaussian approaches the continuum form")
    {
        const auto t = chain(81);
        const double s = 6.0;
        const auto psi = gaussian_packet(t, s, {40, 0, 0});
        const auto g = wigner_lattice(psi);
        double worst = 0.0;
        for (std::size_t i = 0; i < g.x.size(); ++i)
            for (std::size_t j = 0; j < g.k.size(); ++j) {
                const double x = g.x[i] - 40.0;
                const double expect = std::exp(-x * x / (s * s) - s * s * g.k[j] * g.k[j]) / std::numbers::pi;
                worst = std::max(worst, std::abs(g.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - expect));
            }
        CHECK(worst < 1e-6);
    }
    CHECK_THROWS_AS(wigner_lattice(gaussian_packet(std::make_shared<const SiteTable>(build_lattice(2, {4, 4, 1})), 1.0, {2, 2, 0})),
                    InvalidSpec);
}

TEST_CASE("CSV exports carry units")
{
    const auto dir = std::filesystem::temp_directory_path();
    const auto t = chain(5);
    const auto psi = gaussian_packet(t, 1.0, {2, 0, 0});
    write_snapshot_csv(dir / "spinlens_snap.csv", psi);
    write_wigner_csv(dir / "spinlens_wig.csv", wigner_lattice(psi));
    std::ifstream a(dir / "spinlens_snap.csv"), b(dir / "spinlens_wig.csv");
    std::string ha, hb;
    std::getline(a, ha);
    std::getline(b, hb);
    CHECK(ha == "label_x[1],x[a],re_psi[1],im_psi[1],p_n[1]");
    CHECK(hb == "x_n[a],k[1/a],W[1]");
    std::filesystem::remove(dir / "spinlens_snap.csv");
    std::filesystem::remove(dir / "spinlens_wig.csv");
}

} // TEST_SUITE
