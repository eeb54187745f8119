#include "twophase/snapshot.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "twophase/errors.hpp"

namespace twophase {

namespace {

std::string block_name(const char* base, int i) { return std::string(base) + "." + std::to_string(i); }

struct Header {
    int dim = 0;
    int n = 0;
    double t = 0.0;
    std::string name;
};

Header read_header(std::istream& is, const std::string& expected) {
    std::string line;
    while (std::getline(is, line) && line.find_first_not_of(" \t\r") == std::string::npos) {
    }
    if (!is) throw IoError("snapshot: missing block \"" + expected + "\"");
    std::istringstream hs(line);
    Header h;
    if (!(hs >> h.dim >> h.n >> h.t >> h.name))
        throw IoError("snapshot: malformed header line \"" + line + "\"");
    if (h.name != expected)
        throw IoError("snapshot: expected block \"" + expected + "\", found \"" + h.name + "\"");
    return h;
}

ScalarField read_values(std::istream& is, const PeriodicGrid& g, const std::string& name) {
    ScalarField f(g);
    std::string token;
    for (std::size_t k = 0; k < g.cell_count(); ++k) {
        if (!(is >> token)) throw IoError("snapshot: block \"" + name + "\" ends early");
        char* end = nullptr;
        const double x = std::strtod(token.c_str(), &end);
        if (end == token.c_str() || *end != '\0')
            throw IoError("snapshot: bad value \"" + token + "\" in block \"" + name + "\"");
        f[k] = x;
    }
    return f;
}

} // namespace

void write_field(std::ostream& os, const ScalarField& f, double t, const std::string& name) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", t);
    os << f.grid().dim() << ' ' << f.grid().points_per_axis() << ' ' << buf << ' ' << name << '\n';
    for (double x : f.values()) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        os << buf << '\n';
    }
}

void write_snapshot(std::ostream& os, const State& s) {
    s.check_consistent();
    const int d = s.grid().dim();
    write_field(os, s.n, s.t, "n");
    for (int i = 0; i < d; ++i) write_field(os, s.v[i], s.t, block_name("v", i));
    write_field(os, s.rho, s.t, "rho");
    for (int i = 0; i < d; ++i) write_field(os, s.u[i], s.t, block_name("u", i));
}

void write_snapshot(const std::string& path, const State& s) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path + " for writing");
    write_snapshot(os, s);
    if (!os) throw IoError("failed writing " + path);
}

State read_snapshot(std::istream& is) {
    const Header first = read_header(is, "n");
    PeriodicGrid g;
    try {
        g = PeriodicGrid(first.dim, first.n);
    } catch (const Error& e) {
        throw IoError(std::string("snapshot: ") + e.what());
    }
    auto block = [&](const std::string& name) {
        const Header h = read_header(is, name);
        if (h.dim != first.dim || h.n != first.n || h.t != first.t)
            throw IoError("snapshot: block \"" + name + "\" disagrees with the first header");
        return read_values(is, g, name);
    };
    State s;
    s.t = first.t;
    s.n = read_values(is, g, "n");
    std::vector<ScalarField> v, u;
    for (int i = 0; i < g.dim(); ++i) v.push_back(block(block_name("v", i)));
    s.rho = block("rho");
    for (int i = 0; i < g.dim(); ++i) u.push_back(block(block_name("u", i)));
    s.v = VectorField(std::move(v));
    s.u = VectorField(std::move(u));
    return s;
}

State read_snapshot(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open snapshot " + path);
    return read_snapshot(is);
}

} // namespace twophase
