#include "bdecomp/io.hpp"

#include "json.hpp"

#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace bdecomp::io {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

constexpr const char* kDensityTag = "bdecomp-density-v1";
constexpr const char* kClrTag = "bdecomp-clr-v1";
constexpr const char* kReportTag = "bdecomp-report-v1";

json grid_json(const GridMeasure& m) {
    json axes = json::array();
    for (int i = 0; i < m.dim(); ++i) {
        const Axis& ax = m.axis(i);
        axes.push_back(json{
            {"name", ax.name()},
            {"points", std::vector<double>(ax.points().begin(), ax.points().end())},
            {"weights", std::vector<double>(ax.weights().begin(), ax.weights().end())},
        });
    }
    return json{{"axes", axes}};
}

std::vector<double> number_array(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) fail(what + " must be a non-empty array");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number()) fail(what + " must contain only numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

GridPtr grid_from_json(const json& j, const std::string& file) {
    if (!j.is_object() || !j.contains("axes") || !j["axes"].is_array() || j["axes"].empty())
        fail(file + ": grid must contain a non-empty axes array");
    std::vector<Axis> axes;
    for (const auto& a : j["axes"]) {
        if (!a.is_object() || !a.contains("name") || !a["name"].is_string() ||
            !a.contains("points") || !a.contains("weights"))
            fail(file + ": each axis needs name, points, and weights");
        axes.emplace_back(a["name"].get<std::string>(),
                          number_array(a["points"], file + ": axis points"),
                          number_array(a["weights"], file + ": axis weights"));
    }
    return make_grid(std::move(axes));
}

json field_json(const char* tag, const GridMeasure& m, std::span<const double> values,
                const StringMap& metadata) {
    json j;
    j["format"] = tag;
    j["grid"] = grid_json(m);
    j["metadata"] = metadata;
    j["values"] = std::vector<double>(values.begin(), values.end());
    return j;
}

json parse_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) fail("cannot open file: " + p.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        fail("invalid JSON in " + p.string() + ": " + e.what());
    }
}

void expect_format(const json& j, const char* tag, const std::string& file) {
    if (!j.is_object() || !j.contains("format") || !j["format"].is_string() ||
        j["format"].get<std::string>() != tag)
        fail(file + ": expected format tag \"" + tag + "\"");
}

std::vector<double> field_values(const json& j, const GridMeasure& m, const std::string& file) {
    if (!j.contains("values")) fail(file + ": missing values array");
    std::vector<double> values = number_array(j["values"], file + ": values");
    if (values.size() != m.size())
        fail(file + ": values length " + std::to_string(values.size()) +
             " does not match grid size " + std::to_string(m.size()));
    return values;
}

void read_metadata(const json& j, const std::string& file, StringMap* metadata) {
    if (!metadata) return;
    metadata->clear();
    if (!j.contains("metadata")) return;
    const json& meta = j["metadata"];
    if (!meta.is_object()) fail(file + ": metadata must be an object");
    for (const auto& [key, value] : meta.items()) {
        if (!value.is_string()) fail(file + ": metadata values must be strings");
        (*metadata)[key] = value.get<std::string>();
    }
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) fail("cannot open file for writing: " + p.string());
    out << text;
    if (!out) fail("failed to write file: " + p.string());
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(trim(cur));
    return out;
}

bool parse_number(const std::string& token, double* out) {
    if (token.empty()) return false;
    const char* begin = token.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (end != begin + token.size() || errno == ERANGE || !std::isfinite(v)) return false;
    *out = v;
    return true;
}

double require_number(const std::string& token, const std::string& context) {
    double v = 0.0;
    if (!parse_number(token, &v)) fail(context + ": cannot parse number \"" + token + "\"");
    return v;
}

}  // namespace

std::string density_json(const Density& f, const StringMap& metadata) {
    return field_json(kDensityTag, f.measure(), f.values(), metadata).dump(2) + "\n";
}

void write_density(const std::filesystem::path& p, const Density& f, const StringMap& metadata) {
    write_text(p, density_json(f, metadata));
}

Density read_density(const std::filesystem::path& p, StringMap* metadata) {
    const std::string file = p.string();
    const json j = parse_file(p);
    expect_format(j, kDensityTag, file);
    GridPtr m = grid_from_json(j.contains("grid") ? j["grid"] : json{}, file);
    std::vector<double> values = field_values(j, *m, file);
    read_metadata(j, file, metadata);
    return Density(std::move(m), std::move(values));
}

std::string clr_json(const ClrField& z, const StringMap& metadata) {
    return field_json(kClrTag, z.measure(), z.values(), metadata).dump(2) + "\n";
}

void write_clr(const std::filesystem::path& p, const ClrField& z, const StringMap& metadata) {
    write_text(p, clr_json(z, metadata));
}

ClrField read_clr(const std::filesystem::path& p, StringMap* metadata) {
    const std::string file = p.string();
    const json j = parse_file(p);
    expect_format(j, kClrTag, file);
    GridPtr m = grid_from_json(j.contains("grid") ? j["grid"] : json{}, file);
    std::vector<double> values = field_values(j, *m, file);
    read_metadata(j, file, metadata);
    return ClrField(std::move(m), std::move(values));
}

std::string report_json(const DecompositionReport& report) {
    json comps = json::array();
    for (const auto& c : report.components) {
        comps.push_back(json{
            {"subset", c.subset.label()},
            {"norm_sq", c.norm_sq},
            {"share", c.share},
        });
    }
    json j;
    j["format"] = kReportTag;
    j["components"] = comps;
    j["total_norm_sq"] = report.total_norm_sq;
    j["component_sum_sq"] = report.component_sum_sq;
    j["pythagoras_abs"] = report.pythagoras_abs;
    j["pythagoras_rel"] = report.pythagoras_rel;
    j["reconstruction_residual"] = report.reconstruction_residual;
    j["orthogonality_max"] = report.orthogonality_max;
    return j.dump(2) + "\n";
}

std::string report_text(const DecompositionReport& report) {
    std::size_t label_width = std::string("component").size();
    for (const auto& c : report.components)
        label_width = std::max(label_width, c.subset.label().size());

    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(label_width) + 2) << "component"
        << std::setw(26) << "norm_sq" << "share\n";
    for (const auto& c : report.components) {
        out << std::setw(static_cast<int>(label_width) + 2) << c.subset.label()
            << std::setw(26) << format_double(c.norm_sq) << format_double(c.share) << "\n";
    }
    out << std::setw(static_cast<int>(label_width) + 2) << "sum"
        << format_double(report.component_sum_sq) << "\n";
    out << std::setw(static_cast<int>(label_width) + 2) << "source"
        << format_double(report.total_norm_sq) << "\n";
    out << "pythagoras: abs=" << format_double(report.pythagoras_abs)
        << " rel=" << format_double(report.pythagoras_rel) << "\n";
    out << "reconstruction residual: " << format_double(report.reconstruction_residual) << "\n";
    out << "orthogonality max: " << format_double(report.orthogonality_max) << "\n";
    return out.str();
}

std::string component_tsv(const GridMeasure& m, IndexSet subset, const ClrField& field) {
    if (subset.empty()) fail("component_tsv: subset must be non-empty");
    if (!subset.subset_of(IndexSet::full(m.dim()))) fail("component_tsv: axis out of range");
    if (!field.measure().same_as(m)) fail("component_tsv: field measure does not match grid");

    const std::vector<int> axes = subset.axes();
    std::ostringstream out;
    for (int a : axes) out << m.axis(a).name() << "\t";
    out << "clr\n";

    // The field is constant along the remaining axes, so walk the sub-grid
    // spanned by the subset axes with all other indices at zero.
    std::vector<std::size_t> idx(axes.size(), 0);
    for (;;) {
        std::size_t flat = 0;
        for (std::size_t k = 0; k < axes.size(); ++k) flat += idx[k] * m.stride(axes[k]);
        for (std::size_t k = 0; k < axes.size(); ++k)
            out << format_double(m.axis(axes[k]).points()[idx[k]]) << "\t";
        out << format_double(field.values()[flat]) << "\n";
        std::size_t a = axes.size();
        while (a-- > 0) {
            if (++idx[a] < m.axis(axes[a]).size()) break;
            idx[a] = 0;
        }
        if (a == static_cast<std::size_t>(-1)) break;
    }
    return out.str();
}

SampleMatrix read_sample_csv(const std::filesystem::path& p, std::vector<std::string>* names) {
    std::ifstream in(p);
    if (!in) fail("cannot open file: " + p.string());
    const std::string file = p.string();

    std::string line;
    if (!std::getline(in, line)) fail(file + ": file is empty");
    const std::vector<std::string> header = split_csv_line(line);
    bool all_numeric = true;
    for (const auto& tok : header) {
        double ignored = 0.0;
        if (!parse_number(tok, &ignored)) {
            all_numeric = false;
            break;
        }
    }
    if (all_numeric)
        fail(file + ": first line must be a header row of variable names");
    for (const auto& tok : header)
        if (tok.empty()) fail(file + ": header has an empty variable name");
    if (names) *names = header;

    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::vector<std::string> tokens = split_csv_line(line);
        if (tokens.size() != header.size())
            fail(file + " line " + std::to_string(line_no) + ": expected " +
                 std::to_string(header.size()) + " fields, got " +
                 std::to_string(tokens.size()));
        for (const auto& tok : tokens)
            values.push_back(
                require_number(tok, file + " line " + std::to_string(line_no)));
        ++rows;
    }
    if (rows < 2) fail(file + ": need at least 2 observation rows");
    return SampleMatrix(rows, header.size(), std::move(values));
}

CorrelationMatrix read_correlation(const std::filesystem::path& p) {
    const std::string file = p.string();
    const json j = parse_file(p);
    if (!j.is_object() || !j.contains("d") || !j["d"].is_number_integer())
        fail(file + ": expected an object with an integer \"d\"");
    const int d = j["d"].get<int>();
    if (d < 1) fail(file + ": \"d\" must be at least 1");
    if (!j.contains("rho") || !j["rho"].is_array() ||
        j["rho"].size() != static_cast<std::size_t>(d))
        fail(file + ": \"rho\" must be an array of " + std::to_string(d) + " rows");
    std::vector<double> entries;
    entries.reserve(static_cast<std::size_t>(d) * static_cast<std::size_t>(d));
    for (const auto& row : j["rho"]) {
        std::vector<double> r = number_array(row, file + ": rho row");
        if (r.size() != static_cast<std::size_t>(d))
            fail(file + ": each rho row must have " + std::to_string(d) + " entries");
        entries.insert(entries.end(), r.begin(), r.end());
    }
    return CorrelationMatrix(d, std::move(entries));
}

MarginalTransform read_marginal_csv(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) fail("cannot open file: " + p.string());
    const std::string file = p.string();

    std::vector<double> x;
    std::vector<double> F;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::vector<std::string> tokens = split_csv_line(line);
        if (tokens.size() != 2)
            fail(file + " line " + std::to_string(line_no) + ": expected two fields x,F");
        double xv = 0.0;
        double fv = 0.0;
        if (!parse_number(tokens[0], &xv) || !parse_number(tokens[1], &fv)) {
            if (line_no == 1) continue;  // optional header row
            fail(file + " line " + std::to_string(line_no) + ": cannot parse numbers");
        }
        x.push_back(xv);
        F.push_back(fv);
    }
    if (x.size() < 2) fail(file + ": need at least 2 breakpoint rows");
    return MarginalTransform(std::move(x), std::move(F));
}

void write_marginal_csv(const std::filesystem::path& p, const MarginalTransform& t) {
    std::ostringstream out;
    out << "x,F\n";
    for (std::size_t k = 0; k < t.breakpoints().size(); ++k)
        out << format_double(t.breakpoints()[k]) << "," << format_double(t.cdf_values()[k])
            << "\n";
    write_text(p, out.str());
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace bdecomp::io
