#include "levyhom/io.hpp"

#include <array>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace levyhom {

namespace {
constexpr char kMagic[4] = {'L', 'V', 'H', 'F'};
}

void write_field_binary(const std::string& path, const Field& field) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open " + path + " for writing");
    const TorusGrid& g = *field.grid();
    const std::uint32_t version = 1, dim = g.dim(), n = g.n();
    const double period = g.period();
    os.write(kMagic, 4);
    os.write(reinterpret_cast<const char*>(&version), 4);
    os.write(reinterpret_cast<const char*>(&dim), 4);
    os.write(reinterpret_cast<const char*>(&n), 4);
    os.write(reinterpret_cast<const char*>(&period), 8);
    os.write(reinterpret_cast<const char*>(field.values().data()),
             static_cast<std::streamsize>(field.size() * sizeof(double)));
    if (!os) throw ConfigError("short write to " + path);
}

Field read_field_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open " + path);
    char magic[4];
    std::uint32_t version = 0, dim = 0, n = 0;
    double period = 0.0;
    is.read(magic, 4);
    is.read(reinterpret_cast<char*>(&version), 4);
    is.read(reinterpret_cast<char*>(&dim), 4);
    is.read(reinterpret_cast<char*>(&n), 4);
    is.read(reinterpret_cast<char*>(&period), 8);
    if (!is || std::memcmp(magic, kMagic, 4) != 0 || version != 1)
        throw ConfigError(path + " is not a field snapshot");
    GridPtr grid = TorusGrid::make(static_cast<int>(dim), static_cast<int>(n), period);
    std::vector<double> vals(grid->total());
    is.read(reinterpret_cast<char*>(vals.data()),
            static_cast<std::streamsize>(vals.size() * sizeof(double)));
    if (!is) throw ConfigError(path + " is truncated");
    return Field(grid, std::move(vals));
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// CsvWriter
// ---------------------------------------------------------------------------

struct CsvWriter::Impl {
    std::ofstream os;
};

CsvWriter::CsvWriter(const std::string& path, const std::string& config_hash)
    : impl_(new Impl) {
    impl_->os.open(path);
    if (!impl_->os) {
        delete impl_;
        throw ConfigError("cannot open " + path + " for writing");
    }
    if (!config_hash.empty()) impl_->os << "# config=" << config_hash << "\n";
}

CsvWriter::~CsvWriter() { delete impl_; }

void CsvWriter::header(const std::vector<std::string>& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i)
        impl_->os << (i ? "," : "") << cols[i];
    impl_->os << "\n";
}

void CsvWriter::row(const std::vector<double>& vals) {
    for (std::size_t i = 0; i < vals.size(); ++i)
        impl_->os << (i ? "," : "") << format_double(vals[i]);
    impl_->os << "\n";
}

void CsvWriter::row_tagged(const std::string& tag, const std::vector<double>& vals) {
    impl_->os << tag;
    for (double v : vals) impl_->os << "," << format_double(v);
    impl_->os << "\n";
}

// ---------------------------------------------------------------------------

void write_field_csv(const std::string& path, const Field& field,
                     const std::string& config_hash) {
    const TorusGrid& g = *field.grid();
    CsvWriter w(path, config_hash);
    std::vector<std::string> cols;
    for (int a = 0; a < g.dim(); ++a) cols.push_back("i" + std::to_string(a));
    cols.push_back("value");
    w.header(cols);
    std::vector<int> idx(g.dim());
    std::vector<double> row(g.dim() + 1);
    for (std::size_t f = 0; f < field.size(); ++f) {
        g.unflatten(f, idx.data());
        for (int a = 0; a < g.dim(); ++a) row[a] = idx[a];
        row[g.dim()] = field[f];
        w.row(row);
    }
}

void write_stream_csv(const std::string& path, const StreamField& stream,
                      const std::string& config_hash) {
    const int d = stream.dim();
    CsvWriter w(path, config_hash);
    std::vector<std::string> cols;
    for (int a = 0; a < d; ++a) cols.push_back("m" + std::to_string(a));
    cols.insert(cols.end(), {"j", "l", "amplitude", "phase"});
    w.header(cols);
    for (const StreamMode& m : stream.modes()) {
        for (int j = 0; j < d; ++j)
            for (int l = j + 1; l < d; ++l) {
                std::vector<double> row;
                for (int a = 0; a < d; ++a) row.push_back(m.m[a]);
                row.push_back(j);
                row.push_back(l);
                row.push_back(m.amp[StreamField::pair_index(j, l, d)]);
                row.push_back(m.phase);
                w.row(row);
            }
    }
}

StreamField read_stream_csv(const std::string& path, int dim, double period) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open " + path);
    std::string line;
    std::vector<StreamMode> modes;
    const int np = StreamField::pair_count(dim);
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 'm') continue;
        std::istringstream ls(line);
        std::vector<double> vals;
        std::string cell;
        while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
        if (static_cast<int>(vals.size()) != dim + 4)
            throw ConfigError(path + ": malformed mode row");
        std::vector<int> m(dim);
        for (int a = 0; a < dim; ++a) m[a] = static_cast<int>(vals[a]);
        const int j = static_cast<int>(vals[dim]);
        const int l = static_cast<int>(vals[dim + 1]);
        // group rows by (m, phase)
        StreamMode* mode = nullptr;
        for (StreamMode& existing : modes)
            if (existing.m == m && existing.phase == vals[dim + 3]) mode = &existing;
        if (!mode) {
            modes.push_back(StreamMode{m, std::vector<double>(np, 0.0), vals[dim + 3]});
            mode = &modes.back();
        }
        mode->amp[StreamField::pair_index(j, l, dim)] = vals[dim + 2];
    }
    return StreamField(dim, period, std::move(modes));
}

void write_effective_csv(const std::string& path, const EffectiveMatrix& a,
                         const std::string& config_hash) {
    CsvWriter w(path, config_hash);
    w.header({"tag", "i", "j", "value"});
    const int d = a.d;
    auto emit = [&](const std::string& tag, const std::vector<double>& mat) {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                w.row_tagged(tag, {static_cast<double>(i), static_cast<double>(j),
                                   mat[i * d + j]});
    };
    emit("a", a.a);
    emit("m2", a.m2_part);
    emit("cross", a.cross_part);
    emit("dirichlet", a.dirichlet_part);
    for (int i = 0; i < d; ++i)
        w.row_tagged("eig", {static_cast<double>(i), 0.0, a.eigenvalues[i]});
}

EffectiveMatrix read_effective_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open " + path);
    EffectiveMatrix a;
    std::string line;
    int dmax = 0;
    std::vector<std::array<double, 4>> rows;
    std::vector<std::string> tags;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("tag,", 0) == 0) continue;
        std::istringstream ls(line);
        std::string tag, cell;
        std::getline(ls, tag, ',');
        std::array<double, 4> vals{0, 0, 0, 0};
        int c = 0;
        while (std::getline(ls, cell, ',') && c < 4) vals[c++] = std::stod(cell);
        tags.push_back(tag);
        rows.push_back(vals);
        if (tag == "a") dmax = std::max(dmax, static_cast<int>(vals[0]) + 1);
    }
    a.d = dmax;
    a.a.assign(dmax * dmax, 0.0);
    a.m2_part.assign(dmax * dmax, 0.0);
    a.cross_part.assign(dmax * dmax, 0.0);
    a.dirichlet_part.assign(dmax * dmax, 0.0);
    a.eigenvalues.assign(dmax, 0.0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const int i = static_cast<int>(rows[r][0]);
        const int j = static_cast<int>(rows[r][1]);
        const double v = rows[r][2];
        if (tags[r] == "a") a.a[i * dmax + j] = v;
        else if (tags[r] == "m2") a.m2_part[i * dmax + j] = v;
        else if (tags[r] == "cross") a.cross_part[i * dmax + j] = v;
        else if (tags[r] == "dirichlet") a.dirichlet_part[i * dmax + j] = v;
        else if (tags[r] == "eig") a.eigenvalues[i] = rows[r][2];
    }
    a.eigenvalues = symmetric_eigenvalues(a.a, dmax);
    a.symmetric_ok = true;
    a.positive_ok = !a.eigenvalues.empty() && a.eigenvalues.front() > 0.0;
    return a;
}

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw ConfigError("cannot open " + tmp + " for writing");
        os << content;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw ConfigError("cannot move " + tmp + " into place");
}

}  // namespace levyhom
