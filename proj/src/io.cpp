#include "pft/io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "pft/errors.hpp"

namespace pft {

std::string fmt(double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

namespace {

double parse_double(const std::string& s) {
    double v = 0.0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ConfigError("bad number '" + s + "' in CSV");
    return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, sep)) out.push_back(cell);
    return out;
}

}  // namespace

void write_embedding_csv(std::ostream& os, const Embedding& e) {
    const LatticeSpec& s = e.spec();
    os << "# n_sites=" << s.n_sites << " spacing=" << fmt(s.spacing) << " mass=" << fmt(s.mass)
       << " boundary=" << to_string(s.boundary) << " wrap_t=" << fmt(e.wrap_t()) << " wrap_x=" << fmt(e.wrap_x())
       << " margin=" << fmt(e.margin()) << "\n";
    os << "index,x_label,T,X\n";
    for (int i = 0; i < e.size(); ++i)
        os << i << ',' << fmt(s.label(i)) << ',' << fmt(e.t()[i]) << ',' << fmt(e.x()[i]) << '\n';
}

Embedding read_embedding_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# ", 0) != 0) throw ConfigError("embedding CSV lacks its header comment");
    LatticeSpec spec;
    double wt = 0.0, wx = 0.0, margin = -1.0;
    for (const auto& kv : split(line.substr(2), ' ')) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
        if (k == "n_sites") spec.n_sites = std::stoi(v);
        else if (k == "spacing") spec.spacing = parse_double(v);
        else if (k == "mass") spec.mass = parse_double(v);
        else if (k == "boundary") spec.boundary = boundary_from_string(v);
        else if (k == "wrap_t") wt = parse_double(v);
        else if (k == "wrap_x") wx = parse_double(v);
        else if (k == "margin") margin = parse_double(v);
    }
    spec.validate();
    if (!std::getline(is, line) || line != "index,x_label,T,X") throw ConfigError("embedding CSV column header");
    Eigen::VectorXd t(spec.n_sites), x(spec.n_sites);
    for (int i = 0; i < spec.n_sites; ++i) {
        if (!std::getline(is, line)) throw ConfigError("embedding CSV truncated");
        auto c = split(line, ',');
        if (c.size() != 4 || std::stoi(c[0]) != i) throw ConfigError("embedding CSV row " + std::to_string(i));
        t[i] = parse_double(c[2]);
        x[i] = parse_double(c[3]);
    }
    return Embedding(spec, t, x, wt, wx, margin);
}

void write_foliation_csv(std::ostream& os, const Foliation& fol) {
    os << "step,site,T,X,N,Nx\n";
    const int n = fol.n_steps();
    for (int k = 0; k <= n; ++k) {
        const Embedding& e = fol.leaves()[k];
        Eigen::VectorXd lapse = Eigen::VectorXd::Zero(e.size()), shift = lapse;
        if (n > 0) {
            const int j = std::min(k, n - 1);
            StepDecomposition d = decompose_unchecked(fol.leaves()[j], fol.leaves()[j + 1],
                                                      fol.times()[j + 1] - fol.times()[j]);
            lapse = d.lapse;
            shift = d.shift;
        }
        for (int i = 0; i < e.size(); ++i)
            os << k << ',' << i << ',' << fmt(e.t()[i]) << ',' << fmt(e.x()[i]) << ',' << fmt(lapse[i]) << ','
               << fmt(shift[i]) << '\n';
    }
}

void write_state_csv(std::ostream& os, const GaussianState& s) {
    const int n = s.spec.n_sites;
    os << "site,mean_phi,mean_pi\n";
    for (int i = 0; i < n; ++i) os << i << ',' << fmt(s.mean[i]) << ',' << fmt(s.mean[n + i] / s.spec.spacing) << '\n';
}

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m) {
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) os << (c ? "," : "") << fmt(m(r, c));
        os << '\n';
    }
}

void write_bogoliubov_csv(std::ostream& os, const BogoliubovMap& m) {
    os << "j,k,re_alpha,im_alpha,re_beta,im_beta\n";
    for (int j = 0; j < m.rows(); ++j)
        for (int k = 0; k < m.cols(); ++k)
            os << j << ',' << k << ',' << fmt(m.alpha(j, k).real()) << ',' << fmt(m.alpha(j, k).imag()) << ','
               << fmt(m.beta(j, k).real()) << ',' << fmt(m.beta(j, k).imag()) << '\n';
}

void write_file(const std::string& dir, const std::string& name, const std::string& text) {
    std::filesystem::create_directories(dir);
    std::ofstream f(std::filesystem::path(dir) / name, std::ios::binary);
    if (!f) throw ExperimentError("cannot write " + dir + "/" + name);
    f << text;
}

}  // namespace pft
