#include "symcap/io.hpp"

#include "symcap/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace symcap::io {

std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << text;
    if (!out) throw InputError("write failed for " + path);
}

void write_json(const std::string& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

std::string orbits_csv(const std::vector<ReebOrbit>& orbits) {
    std::ostringstream os;
    os << "action,period,rotation_number,cz,type,x1,y1,x2,y2\n";
    for (const auto& o : orbits) {
        os << fmt(o.action) << ',' << fmt(o.period) << ',' << fmt(o.rotation_number) << ',' << o.cz_index << ','
           << orbit_type_name(o.type);
        for (double c : o.initial_point) os << ',' << fmt(c);
        os << '\n';
    }
    return os.str();
}

std::string section_csv(const SectionReturnData& d) {
    std::ostringstream os;
    os << "i,j,r,theta,ret_r,ret_theta,sigma,theta_lift\n";
    for (int i = 0; i < d.n_r; ++i)
        for (int j = 0; j < d.n_theta; ++j) {
            const auto k = d.idx(i, j);
            os << i << ',' << j << ',' << fmt(d.r_at(i)) << ',' << fmt(d.theta_at(j)) << ',' << fmt(d.ret_r[k]) << ','
               << fmt(d.ret_theta[k]) << ',' << fmt(d.sigma[k]) << ',' << fmt(d.theta_lift[k]) << '\n';
        }
    return os.str();
}

std::string lift_csv(const PolarGrid& g, const std::vector<double>& R, const std::vector<double>& Theta) {
    std::ostringstream os;
    os << "r,theta,R,Theta_lift\n";
    for (int i = 0; i < g.n_r; ++i)
        for (int j = 0; j < g.n_theta; ++j)
            os << fmt(g.r_at(i)) << ',' << fmt(g.theta_at(j)) << ',' << fmt(R[g.idx(i, j)]) << ','
               << fmt(Theta[g.idx(i, j)]) << '\n';
    return os.str();
}

namespace {

std::vector<double> parse_row(const std::string& line, const std::string& where) {
    std::vector<double> v;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
        double x;
        auto res = std::from_chars(p, end, x);
        if (res.ec != std::errc()) throw InputError(where + ": malformed number");
        v.push_back(x);
        p = res.ptr;
        if (p < end && *p == ',') ++p;
        else if (p < end && *p != '\r') throw InputError(where + ": expected ','");
        else break;
    }
    return v;
}

}  // namespace

StripMap read_lift_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::string line;
    std::getline(in, line);
    if (line.rfind("r,theta,R,Theta_lift", 0) != 0) throw InputError(path + ": expected header r,theta,R,Theta_lift");
    std::vector<std::array<double, 4>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto v = parse_row(line, path + ":" + std::to_string(lineno));
        if (v.size() != 4) throw InputError(path + ":" + std::to_string(lineno) + ": expected 4 columns");
        rows.push_back({v[0], v[1], v[2], v[3]});
    }
    std::size_t nth = 0;
    while (nth < rows.size() && rows[nth][0] == rows[0][0]) ++nth;
    if (nth < 4 || rows.size() % nth != 0) throw InputError(path + ": rows do not form a polar grid");
    StripMap m;
    m.grid = PolarGrid{static_cast<int>(rows.size() / nth), static_cast<int>(nth)};
    if (m.grid.n_r < 3) throw InputError(path + ": need at least 3 radial rows");
    m.R.resize(rows.size());
    m.Theta.resize(rows.size());
    for (int i = 0; i < m.grid.n_r; ++i)
        for (int j = 0; j < m.grid.n_theta; ++j) {
            const auto k = m.grid.idx(i, j);
            if (std::abs(rows[k][0] - m.grid.r_at(i)) > 1e-12 || std::abs(rows[k][1] - m.grid.theta_at(j)) > 1e-12)
                throw InputError(path + ": node " + std::to_string(k) + " is off the uniform polar grid");
            m.R[k] = rows[k][2];
            m.Theta[k] = rows[k][3];
        }
    m.monotone = true;
    for (int i = 0; i + 1 < m.grid.n_r; ++i)
        for (int j = 0; j < m.grid.n_theta; ++j)
            if (!(m.R[m.grid.idx(i + 1, j)] > m.R[m.grid.idx(i, j)])) m.monotone = false;
    return m;
}

std::string grid_csv(const PolarGrid& g, const std::vector<double>& values) {
    std::ostringstream os;
    os << "n_r,n_theta\n" << g.n_r << ',' << g.n_theta << '\n';
    for (int i = 0; i < g.n_r; ++i) {
        for (int j = 0; j < g.n_theta; ++j) os << (j ? "," : "") << fmt(values[g.idx(i, j)]);
        os << '\n';
    }
    return os.str();
}

GenFunW read_grid_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::string line;
    std::getline(in, line);
    if (line.rfind("n_r,n_theta", 0) != 0) throw InputError(path + ": expected header n_r,n_theta");
    std::getline(in, line);
    auto sz = parse_row(line, path + ":2");
    if (sz.size() != 2 || sz[0] < 3 || sz[1] < 4) throw InputError(path + ": bad grid size");
    GenFunW w;
    w.grid = PolarGrid{static_cast<int>(sz[0]), static_cast<int>(sz[1])};
    w.W.reserve(w.grid.size());
    for (int i = 0; i < w.grid.n_r; ++i) {
        if (!std::getline(in, line)) throw InputError(path + ": missing rows");
        auto v = parse_row(line, path + ":" + std::to_string(i + 3));
        if (static_cast<int>(v.size()) != w.grid.n_theta) throw InputError(path + ": row length mismatch");
        w.W.insert(w.W.end(), v.begin(), v.end());
    }
    return w;
}

std::string hamiltonian_csv(const PolarGrid& g, int n_t, const std::vector<double>& H) {
    std::ostringstream os;
    os << "k,i,j,H\n";
    for (int k = 0; k < n_t; ++k)
        for (int i = 0; i < g.n_r; ++i)
            for (int j = 0; j < g.n_theta; ++j)
                os << k << ',' << i << ',' << j << ',' << fmt(H[k * g.size() + g.idx(i, j)]) << '\n';
    return os.str();
}

std::string spectrum_csv(const std::vector<double>& spectrum) {
    std::ostringstream os;
    os << "index,action\n";
    for (std::size_t k = 0; k < spectrum.size(); ++k) os << k + 1 << ',' << fmt(spectrum[k]) << '\n';
    return os.str();
}

nlohmann::json to_json(const ConditionReport& c) {
    auto one = [](const ConditionResult& r) {
        return nlohmann::json{{"pass", r.pass}, {"margin", r.margin}, {"i", r.i}, {"j", r.j}};
    };
    return {{"c1", one(c.c1)},
            {"c2", one(c.c2)},
            {"c3", one(c.c3)},
            {"c4", one(c.c4)},
            {"fit", {{"c1", c.fit_c1}, {"c2", c.fit_c2}, {"c3", c.fit_c3}}},
            {"fit_residual", {{"inner", c.fit_residual_inner}, {"outer", c.fit_residual_outer}}}};
}

nlohmann::json to_json(const PipelineResult& r) {
    nlohmann::json fps = nlohmann::json::array();
    for (const auto& p : r.fixed_points)
        fps.push_back({{"r", p.r}, {"theta", p.theta}, {"W", p.W}, {"H_mismatch", p.H_mismatch}});
    return {{"status", "positive"},
            {"grid", {{"n_r", r.W.grid.n_r}, {"n_theta", r.W.grid.n_theta}}},
            {"n_t", r.n_t},
            {"min_interior", r.min_interior},
            {"max_identity_error", r.max_identity_error},
            {"inner_rotation", r.inner_rotation},
            {"outer_rotation", r.outer_rotation},
            {"fixed_points", fps},
            {"conditions", to_json(r.conditions)}};
}

}  // namespace symcap::io
