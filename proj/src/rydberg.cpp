#include "spinlens/rydberg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "spinlens/csv.hpp"
#include "spinlens/error.hpp"

namespace spinlens::rydberg {

double DressingParams::dimensionless_distance(double r) const
{
    return std::pow(std::abs(detuning) / c12, 1.0 / 6.0) * r;
}

double DressingParams::validity_ratio() const
{
    return std::abs(rabi) / std::abs(detuning);
}

void DressingParams::validate() const
{
    if (!(rabi > 0.0))
        throw InvalidSpec("dressing: Rabi frequency must be positive");
    if (detuning == 0.0 || !std::isfinite(detuning))
        throw InvalidSpec("dressing: detuning must be finite and non-zero");
    if (!(c12 > 0.0))
        throw InvalidSpec("dressing: c12 must be positive");
    if (!(xi >= 0.0 && xi < 1.0))
        throw InvalidSpec("dressing: exchange ratio xi must lie in [0, 1)");
}

SoftCore effective_potentials(double r_tilde, double xi)
{
    const double r6 = std::pow(r_tilde, 6);
    const double denom = (r6 + 1.0) * (r6 + 1.0) - xi * xi;
    if (!std::isfinite(r6))
        return {1.0, 0.0};
    return {(r6 * r6 + r6) / denom, xi * r6 / denom};
}

SoftCore effective_potentials_derivative(double r_tilde, double xi)
{
    // d/du with u = r~^6, then chain rule du/dr~ = 6 r~^5.
    const double u = std::pow(r_tilde, 6);
    const double du = 6.0 * std::pow(r_tilde, 5);
    const double denom = (u + 1.0) * (u + 1.0) - xi * xi;
    const double ddenom = 2.0 * (u + 1.0);
    const double num_v = u * u + u;
    const double dv = ((2.0 * u + 1.0) * denom - num_v * ddenom) / (denom * denom);
    const double dw = xi * (denom - u * ddenom) / (denom * denom);
    return {dv * du, dw * du};
}

double exchange_maximum(double xi)
{
    return std::pow(std::sqrt(1.0 - xi * xi), 1.0 / 6.0);
}

DressedCoupling dressed_couplings(const DressingParams& params, double r)
{
    const SoftCore sc = effective_potentials(params.dimensionless_distance(r), params.xi);
    const double omega2 = params.rabi * params.rabi;
    return {omega2 / (4.0 * params.detuning) * sc.v, omega2 / (2.0 * params.detuning) * sc.w};
}

DressedCoupling dressed_couplings_derivative(const DressingParams& params, double r)
{
    const double scale = std::pow(std::abs(params.detuning) / params.c12, 1.0 / 6.0);
    const SoftCore d = effective_potentials_derivative(scale * r, params.xi);
    const double omega2 = params.rabi * params.rabi;
    return {omega2 / (4.0 * params.detuning) * d.v * scale,
            omega2 / (2.0 * params.detuning) * d.w * scale};
}

double asymptotic_v_sg(const DressingParams& params)
{
    return params.rabi * params.rabi / (4.0 * params.detuning);
}

DressingParams params_for_unit_hopping(double xi, double spacing, double hopping,
                                       double rabi_over_detuning)
{
    if (!(xi > 0.0 && xi < 1.0))
        throw InvalidSpec("params_for_unit_hopping: xi must lie in (0, 1)");
    const double r_star = exchange_maximum(xi);
    const double w_max = effective_potentials(r_star, xi).w;
    // hopping = Omega^2/(4|Delta|) W~max with Omega = rho |Delta|.
    const double abs_detuning = 4.0 * hopping / (rabi_over_detuning * rabi_over_detuning * w_max);
    DressingParams p;
    p.detuning = -abs_detuning;
    p.rabi = rabi_over_detuning * abs_detuning;
    p.xi = xi;
    p.c12 = abs_detuning * std::pow(spacing / r_star, 6);
    return p;
}

VdwCoefficients vdw_iso_aniso(const ChannelC6& ch)
{
    const auto& c = ch.c6;
    return {(7.0 * c[0] + 25.0 * c[1] + 11.0 * (c[2] + c[3])) / 81.0,
            (c[2] + c[3] - c[0] - c[1]) / 27.0};
}

Eigen::Matrix4cd d0_matrix(double theta, double phi)
{
    using cd = std::complex<double>;
    const double c2 = std::cos(2.0 * theta);
    const double s2 = std::sin(2.0 * theta);
    const double sq = std::sin(theta) * std::sin(theta);
    const cd e1 = std::polar(1.0, phi);
    const cd e2 = std::polar(1.0, 2.0 * phi);

    Eigen::Matrix4cd d;
    d << c2, std::conj(e1) * s2, std::conj(e1) * s2, 2.0 * std::conj(e2) * sq,
        e1 * s2, 2.0 / 3.0 - c2, -c2 - 5.0 / 3.0, -std::conj(e1) * s2,
        e1 * s2, -c2 - 5.0 / 3.0, 2.0 / 3.0 - c2, -std::conj(e1) * s2,
        2.0 * e2 * sq, -e1 * s2, -e1 * s2, c2;
    return d;
}

std::vector<CoefficientRow> read_coefficient_table(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw InvalidSpec("cannot open coefficient table " + path.string());
    std::string line;
    if (!std::getline(in, line))
        throw InvalidSpec("coefficient table is empty: " + path.string());

    const auto header = split_csv_line(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i)
        col[header[i]] = i;
    for (const char* name : {"n", "c11", "c12", "w12"})
        if (!col.count(name))
            throw InvalidSpec(std::string("coefficient table missing column '") + name + "'");

    std::vector<CoefficientRow> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#')
            continue;
        const auto fields = split_csv_line(line);
        if (fields.size() < header.size())
            throw InvalidSpec("coefficient table line " + std::to_string(line_no) + ": too few fields");
        try {
            CoefficientRow row;
            row.n = std::stoi(fields[col["n"]]);
            row.c11 = std::stod(fields[col["c11"]]);
            row.c12 = std::stod(fields[col["c12"]]);
            row.w12 = std::stod(fields[col["w12"]]);
            rows.push_back(row);
        } catch (const std::logic_error&) {
            throw InvalidSpec("coefficient table line " + std::to_string(line_no) + ": bad number");
        }
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.n < b.n; });
    return rows;
}

double interpolate_xi(const std::vector<CoefficientRow>& table, double n)
{
    if (table.empty())
        throw InvalidSpec("interpolate_xi: empty table");
    if (n < table.front().n || n > table.back().n)
        throw InvalidSpec("interpolate_xi: n outside table range");
    for (std::size_t i = 0; i + 1 < table.size(); ++i) {
        const auto& lo = table[i];
        const auto& hi = table[i + 1];
        if (n >= lo.n && n <= hi.n) {
            const double t = (n - lo.n) / static_cast<double>(hi.n - lo.n);
            return (1.0 - t) * lo.xi() + t * hi.xi();
        }
    }
    return table.back().xi();
}

void write_potential_curve(const std::filesystem::path& path, double xi, double r_max, int samples)
{
    CsvWriter csv(path, {"r_tilde[1]", "V_tilde[1]", "W_tilde[1]"});
    for (int i = 0; i < samples; ++i) {
        const double r = r_max * i / std::max(1, samples - 1);
        const SoftCore sc = effective_potentials(r, xi);
        csv.row({r, sc.v, sc.w});
    }
}

} // namespace spinlens::rydberg
