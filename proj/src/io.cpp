#include "fhm/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fhm {

using Json = nlohmann::json;

std::string_view to_string(FieldKind kind)
{
    switch (kind) {
    case FieldKind::metric: return "metric";
    case FieldKind::matrix: return "matrix";
    case FieldKind::hermitian: return "hermitian";
    case FieldKind::scalar: return "scalar";
    case FieldKind::boundary: return "boundary";
    }
    return "matrix";
}

FieldKind field_kind_from_string(std::string_view name)
{
    for (FieldKind k : {FieldKind::metric, FieldKind::matrix, FieldKind::hermitian, FieldKind::scalar,
                        FieldKind::boundary})
        if (to_string(k) == name)
            return k;
    throw InputError("document: unknown kind \"" + std::string(name) + "\"");
}

std::string format_real(double x)
{
    if (!std::isfinite(x))
        throw InputError("serialize: non-finite value");
    if (x == 0.0 && std::signbit(x))
        return "-0.0";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

void write_domain(std::ostringstream& os, const DomainSpec& d)
{
    if (d.kind == DomainKind::annulus)
        os << "{\"kind\": \"annulus\", \"r_inner\": " << format_real(*d.r_inner)
           << ", \"r_outer\": " << format_real(d.r_outer) << "}";
    else
        os << "{\"kind\": \"disc\", \"r_outer\": " << format_real(d.r_outer) << "}";
}

/// One matrix per line, row-major, (re, im) pairs.
void write_matrices(std::ostringstream& os, const cplx* values, std::size_t count, int dim)
{
    os << "[";
    const auto stride = static_cast<std::size_t>(dim) * dim;
    for (std::size_t m = 0; m < count; ++m) {
        os << (m == 0 ? "\n    " : ",\n    ");
        const cplx* x = values + m * stride;
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) {
                const cplx v = x[static_cast<std::size_t>(c) * dim + r];
                if (r != 0 || c != 0)
                    os << ", ";
                os << format_real(v.real()) << ", " << format_real(v.imag());
            }
    }
    os << (count == 0 ? "]" : "\n  ]");
}

Json parse_document(std::string_view text)
{
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
        throw InputError(std::string("document: malformed JSON: ") + e.what());
    }
}

const Json& member(const Json& doc, const char* key)
{
    if (!doc.is_object() || !doc.contains(key))
        throw InputError(std::string("document: missing field \"") + key + "\"");
    return doc.at(key);
}

double real_member(const Json& doc, const char* key)
{
    const Json& v = member(doc, key);
    if (!v.is_number())
        throw InputError(std::string("document: field \"") + key + "\" must be a number");
    return v.get<double>();
}

int int_member(const Json& doc, const char* key)
{
    const Json& v = member(doc, key);
    if (!v.is_number_integer())
        throw InputError(std::string("document: field \"") + key + "\" must be an integer");
    const auto x = v.get<long long>();
    if (x < 0 || x > (1LL << 30))
        throw InputError(std::string("document: field \"") + key + "\" is out of range");
    return static_cast<int>(x);
}

std::string string_member(const Json& doc, const char* key)
{
    const Json& v = member(doc, key);
    if (!v.is_string())
        throw InputError(std::string("document: field \"") + key + "\" must be a string");
    return v.get<std::string>();
}

void require_format(const Json& doc, std::string_view expected)
{
    const std::string f = string_member(doc, "format");
    if (f != expected)
        throw InputError("document: unknown format tag \"" + f + "\", expected \"" + std::string(expected) + "\"");
}

DomainSpec read_domain(const Json& doc)
{
    const Json& d = member(doc, "domain");
    const std::string kind = string_member(d, "kind");
    DomainSpec out;
    if (kind == "annulus") {
        out = {DomainKind::annulus, real_member(d, "r_inner"), real_member(d, "r_outer")};
    } else if (kind == "disc") {
        if (d.contains("r_inner"))
            throw InputError("document: disc domain must not carry \"r_inner\"");
        out = {DomainKind::disc, std::nullopt, real_member(d, "r_outer")};
    } else {
        throw InputError("document: unknown domain kind \"" + kind + "\"");
    }
    out.validate();
    return out;
}

int read_dim(const Json& doc)
{
    const int dim = int_member(doc, "dim");
    if (dim < 1 || dim > kMaxDim)
        throw InputError("document: \"dim\" must lie in [1, " + std::to_string(kMaxDim) + "]");
    return dim;
}

std::vector<cplx> read_matrices(const Json& doc, const char* key, std::size_t count, int dim)
{
    const Json& arr = member(doc, key);
    if (!arr.is_array())
        throw InputError(std::string("document: field \"") + key + "\" must be an array");
    const auto stride = static_cast<std::size_t>(dim) * dim;
    const std::size_t expected = count * stride * 2;
    if (arr.size() != expected)
        throw InputError(std::string("document: field \"") + key + "\" has " + std::to_string(arr.size()) +
                         " numbers, expected " + std::to_string(expected) + " (" + std::to_string(count) +
                         " matrices of size " + std::to_string(dim) + "x" + std::to_string(dim) + ")");
    std::vector<cplx> out(count * stride);
    std::size_t pos = 0;
    for (std::size_t m = 0; m < count; ++m)
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) {
                double parts[2];
                for (double& part : parts) {
                    const Json& v = arr[pos];
                    if (!v.is_number())
                        throw InputError(std::string("document: ") + key + "[" + std::to_string(pos) +
                                         "] is not a number");
                    part = v.get<double>();
                    ++pos;
                }
                out[m * stride + static_cast<std::size_t>(c) * dim + r] = {parts[0], parts[1]};
            }
    return out;
}

Grid read_grid(const Json& doc, const DomainSpec& domain)
{
    const Json& g = member(doc, "grid");
    return Grid(domain, int_member(g, "n_rad"), int_member(g, "n_ang"));
}

void write_field_header(std::ostringstream& os, std::string_view format, std::string_view kind, const Grid& g,
                        int dim)
{
    os << "{\n  \"format\": \"" << format << "\",\n";
    if (!kind.empty())
        os << "  \"kind\": \"" << kind << "\",\n";
    os << "  \"domain\": ";
    write_domain(os, g.domain());
    os << ",\n  \"grid\": {\"n_rad\": " << g.n_rad() << ", \"n_ang\": " << g.n_ang() << "},\n";
    os << "  \"dim\": " << dim << ",\n";
}

}  // namespace

std::string serialize_field(const MatrixField& field, FieldKind kind)
{
    if (kind == FieldKind::boundary)
        throw InputError("serialize_field: use serialize_boundary for boundary data");
    if (kind == FieldKind::scalar && field.dim() != 1)
        throw InputError("serialize_field: scalar fields must have dim 1");
    std::ostringstream os;
    write_field_header(os, kFieldFormat, to_string(kind), field.grid(), field.dim());
    os << "  \"data\": ";
    write_matrices(os, field.values().data(), field.size(), field.dim());
    os << "\n}\n";
    return os.str();
}

FieldDocument deserialize_field(std::string_view text)
{
    const Json doc = parse_document(text);
    require_format(doc, kFieldFormat);
    const FieldKind kind = field_kind_from_string(string_member(doc, "kind"));
    if (kind == FieldKind::boundary)
        throw InputError("document: kind \"boundary\" is read with deserialize_boundary");
    const DomainSpec domain = read_domain(doc);
    Grid grid = read_grid(doc, domain);
    const int dim = read_dim(doc);
    MatrixField field(grid, dim, read_matrices(doc, "data", grid.size(), dim));
    for (cplx v : field.values())
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw InputError("document: non-finite entry in \"data\"");
    switch (kind) {
    case FieldKind::metric: field = MetricField(std::move(field)); break;
    case FieldKind::hermitian: field = HermitianField(std::move(field)); break;
    case FieldKind::scalar:
        if (dim != 1)
            throw InputError("document: scalar fields must have dim 1");
        for (std::size_t k = 0; k < field.size(); ++k)
            if (field.values()[k].imag() != 0.0)
                throw InputError("document: scalar field has an imaginary part at node " + std::to_string(k));
        break;
    default: break;
    }
    return {kind, std::move(field)};
}

MetricField deserialize_metric(std::string_view text)
{
    FieldDocument doc = deserialize_field(text);
    if (doc.kind != FieldKind::metric)
        throw InputError("document: expected kind \"metric\", found \"" + std::string(to_string(doc.kind)) + "\"");
    return MetricField(std::move(doc.field));
}

std::string serialize_boundary(const BoundaryData& data)
{
    data.validate_shape();
    std::ostringstream os;
    os << "{\n  \"format\": \"" << kFieldFormat << "\",\n  \"kind\": \"boundary\",\n  \"domain\": ";
    write_domain(os, data.domain);
    os << ",\n  \"grid\": {\"n_ang\": " << data.n_ang << "},\n  \"dim\": " << data.dim << ",\n";
    if (data.domain.kind == DomainKind::annulus) {
        os << "  \"inner\": ";
        write_matrices(os, data.inner.data(), static_cast<std::size_t>(data.n_ang), data.dim);
        os << ",\n";
    }
    os << "  \"outer\": ";
    write_matrices(os, data.outer.data(), static_cast<std::size_t>(data.n_ang), data.dim);
    os << "\n}\n";
    return os.str();
}

BoundaryData deserialize_boundary(std::string_view text)
{
    const Json doc = parse_document(text);
    require_format(doc, kFieldFormat);
    const std::string kind = string_member(doc, "kind");
    if (kind != "boundary")
        throw InputError("document: expected kind \"boundary\", found \"" + kind + "\"");
    BoundaryData out;
    out.domain = read_domain(doc);
    out.n_ang = int_member(member(doc, "grid"), "n_ang");
    out.dim = read_dim(doc);
    if (out.n_ang < 8 || out.n_ang % 2 != 0)
        throw InputError("document: boundary \"n_ang\" must be even and at least 8");
    const auto count = static_cast<std::size_t>(out.n_ang);
    if (out.domain.kind == DomainKind::annulus)
        out.inner = read_matrices(doc, "inner", count, out.dim);
    else if (doc.contains("inner"))
        throw InputError("document: disc boundary must not carry \"inner\"");
    out.outer = read_matrices(doc, "outer", count, out.dim);
    out.validate_shape();
    for (Circle c : out.circles())
        for (int j = 0; j < out.n_ang; ++j) {
            auto x = out.sample(c, j);
            const Mat v = x;
            x = 0.5 * (v + Mat(v.adjoint()));
        }
    return out;
}

std::string serialize_factorization(const FactorizationResult& fact)
{
    const Grid& g = fact.k.grid();
    const int dim = fact.k.dim();
    std::ostringstream os;
    write_field_header(os, kFactorizationFormat, "", g, dim);
    os << "  \"base_node\": " << fact.base_node << ",\n";
    os << "  \"monodromy_unitarity_defect\": " << format_real(fact.monodromy_unitarity_defect) << ",\n";
    os << "  \"periodicity_defect\": " << format_real(fact.periodicity_defect) << ",\n";
    os << "  \"frame_defect\": " << format_real(fact.frame_defect) << ",\n";
    os << "  \"flatness_measure\": " << format_real(fact.flatness_measure) << ",\n";
    Eigen::MatrixXcd a = fact.a;
    os << "  \"a\": ";
    write_matrices(os, a.data(), 1, dim);
    os << ",\n  \"k\": ";
    write_matrices(os, fact.k.values().data(), fact.k.size(), dim);
    os << "\n}\n";
    return os.str();
}

FactorizationResult deserialize_factorization(std::string_view text)
{
    const Json doc = parse_document(text);
    require_format(doc, kFactorizationFormat);
    const DomainSpec domain = read_domain(doc);
    if (domain.kind != DomainKind::annulus)
        throw InputError("document: factorizations live on an annulus");
    Grid grid = read_grid(doc, domain);
    const int dim = read_dim(doc);
    const int base = int_member(doc, "base_node");
    if (static_cast<std::size_t>(base) >= grid.size())
        throw InputError("document: \"base_node\" is out of range");

    const std::vector<cplx> a_vals = read_matrices(doc, "a", 1, dim);
    Mat a = Eigen::Map<const Eigen::MatrixXcd>(a_vals.data(), dim, dim);
    if (!a.allFinite() || hermiticity_defect(a) > kTolHerm * std::max(1.0, op_norm(a)))
        throw InputError("document: \"a\" must be self-adjoint");
    a = 0.5 * (a + Mat(a.adjoint()));

    MatrixField k(grid, dim, read_matrices(doc, "k", grid.size(), dim));
    for (cplx v : k.values())
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw InputError("document: non-finite entry in \"k\"");
    return {std::move(k),
            a,
            static_cast<std::size_t>(base),
            real_member(doc, "monodromy_unitarity_defect"),
            real_member(doc, "periodicity_defect"),
            real_member(doc, "frame_defect"),
            real_member(doc, "flatness_measure")};
}

std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const std::string& path, std::string_view text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw InputError("cannot write " + path);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out)
        throw InputError("write failed for " + path);
}

}  // namespace fhm
