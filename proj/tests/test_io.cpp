#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>
#include <regex>

#include "fhm/io.hpp"
#include "fhm/verification.hpp"
#include "support.hpp"

using namespace fhm;

namespace {

/// Numbers inside the "data" array, as written.
std::vector<std::string> data_tokens(const std::string& doc)
{
    const std::size_t begin = doc.find('[', doc.find("\"data\""));
    const std::size_t end = doc.find(']', begin);
    const std::string body = doc.substr(begin + 1, end - begin - 1);
    std::vector<std::string> out;
    const std::regex number(R"([-+0-9.eE]+)");
    for (auto it = std::sregex_iterator(body.begin(), body.end(), number); it != std::sregex_iterator(); ++it)
        out.push_back(it->str());
    return out;
}

bool bitwise_equal(const MatrixField& a, const MatrixField& b)
{
    return a.grid() == b.grid() && a.dim() == b.dim() &&
           std::memcmp(a.values().data(), b.values().data(), a.values().size_bytes()) == 0;
}

MatrixField random_field(const Grid& g, int dim, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    MatrixField f(g, dim);
    for (cplx& v : f.values())
        v = {normal(rng) * std::exp(normal(rng) * 20.0), normal(rng) / 3.0};
    return f;
}

std::string replace_once(std::string s, const std::string& from, const std::string& to)
{
    const std::size_t at = s.find(from);
    REQUIRE(at != std::string::npos);
    return s.replace(at, from.size(), to);
}

}  // namespace

TEST_CASE("identity metric document")
{
    const Grid g = test::annulus(8, 8);
    const std::string doc = serialize_field(MetricField::identity(g, 2), FieldKind::metric);
    CHECK(doc.find("\"format\": \"fhm-field/1\"") != std::string::npos);
    CHECK(doc.find("\"kind\": \"metric\"") != std::string::npos);
    const std::vector<std::string> tokens = data_tokens(doc);
    REQUIRE(tokens.size() == 512);
    for (std::size_t q = 0; q < tokens.size(); q += 8) {
        CHECK(tokens[q] == "1");
        CHECK(tokens[q + 6] == "1");
        for (std::size_t r : {1, 2, 3, 4, 5, 7})
            CHECK(tokens[q + r] == "0");
    }
}

TEST_CASE("row-major, real before imaginary")
{
    const Grid g = test::annulus(8, 8);
    MatrixField f(g, 2);
    f.at(0)(0, 1) = cplx(3.0, 4.0);
    f.at(0)(1, 0) = cplx(5.0, 6.0);
    const std::vector<std::string> tokens = data_tokens(serialize_field(f, FieldKind::matrix));
    CHECK(tokens[2] == "3");
    CHECK(tokens[3] == "4");
    CHECK(tokens[4] == "5");
    CHECK(tokens[5] == "6");
}

TEST_CASE("format_real")
{
    CHECK(format_real(1.0) == "1");
    CHECK(format_real(0.0) == "0");
    CHECK(format_real(-0.0) == "-0.0");
    CHECK(format_real(0.1) == "0.10000000000000001");
    CHECK(std::stod(format_real(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK_THROWS_AS(serialize_field(MatrixField::constant(test::annulus(8, 8), test::scalar(NAN)), FieldKind::matrix),
                    InputError);
}

TEST_CASE("fields round trip bit for bit")
{
    for (const Grid& g : {test::annulus(9, 12, 0.3, 1.7), test::disc(8, 16, 2.5)}) {
        MatrixField f = random_field(g, 3, 17);
        f.at(1)(2, 2) = cplx(-0.0, -0.0);
        f.at(2)(0, 0) = cplx(5e-324, -1.7976931348623157e308);
        const FieldDocument back = deserialize_field(serialize_field(f, FieldKind::matrix));
        CHECK(back.kind == FieldKind::matrix);
        CHECK(bitwise_equal(back.field, f));
        CHECK(std::signbit(back.field.at(1)(2, 2).real()));
        CHECK(std::signbit(back.field.at(1)(2, 2).imag()));

        const SyntheticFlat syn = synthetic_flat({2, 1, 0.15, {}, 5}, test::annulus(8, 16));
        const MetricField p = deserialize_metric(serialize_field(syn.metric, FieldKind::metric));
        CHECK(bitwise_equal(p, syn.metric));
        CHECK(serialize_field(p, FieldKind::metric) == serialize_field(syn.metric, FieldKind::metric));
    }
}

TEST_CASE("kinds are validated on read")
{
    const Grid g = test::annulus(8, 8);
    const MatrixField raw = random_field(g, 2, 3);
    const std::string as_matrix = serialize_field(raw, FieldKind::matrix);
    CHECK_THROWS_AS(deserialize_field(replace_once(as_matrix, "\"matrix\"", "\"hermitian\"")), InputError);
    CHECK_THROWS_AS(deserialize_field(replace_once(as_matrix, "\"matrix\"", "\"metric\"")), InputError);
    CHECK_THROWS_AS(deserialize_metric(serialize_field(MetricField::identity(g, 2), FieldKind::hermitian)), InputError);

    MatrixField neg = MatrixField::identity(g, 2);
    neg.at(5)(1, 1) = -1.0;
    CHECK_THROWS_AS(deserialize_field(serialize_field(neg, FieldKind::hermitian).replace(
                        serialize_field(neg, FieldKind::hermitian).find("\"hermitian\""), 11, "\"metric\"")),
                    InputError);

    MatrixField s = MatrixField::constant(g, test::scalar(2.0));
    CHECK(deserialize_field(serialize_field(s, FieldKind::scalar)).kind == FieldKind::scalar);
    s.at(3)(0, 0) = cplx(2.0, 1.0);
    CHECK_THROWS_AS(deserialize_field(serialize_field(s, FieldKind::scalar)), InputError);
    CHECK_THROWS_AS(serialize_field(raw, FieldKind::scalar), InputError);
    CHECK_THROWS_AS(serialize_field(raw, FieldKind::boundary), InputError);
}

TEST_CASE("malformed documents give input errors")
{
    const Grid g = test::annulus(8, 8);
    const std::string good = serialize_field(MetricField::identity(g, 2), FieldKind::metric);
    auto message = [](const std::string& doc) {
        try {
            deserialize_field(doc);
        } catch (const InputError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    // dim = 2 header with 3 x 3 matrices.
    const std::string three = serialize_field(MetricField::identity(g, 3), FieldKind::metric);
    const std::string bad_dim = replace_once(three, "\"dim\": 3", "\"dim\": 2");
    CHECK(message(bad_dim).find("\"data\"") != std::string::npos);

    CHECK(message(replace_once(good, "fhm-field/1", "fhm-field/9")).find("unknown format") != std::string::npos);
    CHECK(message(good.substr(0, good.size() / 2)).find("malformed") != std::string::npos);
    CHECK(message(replace_once(good, "\"kind\": \"metric\"", "\"kind\": \"tensor\"")).find("tensor") != std::string::npos);
    CHECK(message(replace_once(good, "\"n_rad\": 8", "\"n_rad\": 8.5")).find("n_rad") != std::string::npos);
    CHECK(message(replace_once(good, "\"dim\": 2", "\"dim\": 0")).find("dim") != std::string::npos);
    CHECK(message(replace_once(good, "\"dim\": 2,", "")).find("missing") != std::string::npos);
    CHECK(message(replace_once(good, "\"r_inner\": 0.5", "\"r_inner\": 1.5")) != "");
    CHECK(message(replace_once(good, "1, 0, 0, 0", "\"1\", 0, 0, 0")).find("data[") != std::string::npos);
    CHECK(message("[]") != "");
    CHECK(message("") != "");
}

TEST_CASE("boundary documents")
{
    const SyntheticFlat syn = synthetic_flat({2, 1, 0.15, {}, 2}, test::annulus(8, 16));
    const std::string doc = serialize_boundary(syn.boundary);
    CHECK(doc.find("\"inner\"") != std::string::npos);
    CHECK(doc.find("\"n_rad\"") == std::string::npos);
    CHECK(deserialize_boundary(doc) == syn.boundary);

    const BoundaryData disc = restrict_boundary(MatrixField::identity(test::disc(8, 16), 1));
    const std::string ddoc = serialize_boundary(disc);
    CHECK(ddoc.find("\"inner\"") == std::string::npos);
    CHECK(deserialize_boundary(ddoc) == disc);

    CHECK_THROWS_AS(deserialize_boundary(replace_once(doc, "\"n_ang\": 16", "\"n_ang\": 15")), InputError);
    CHECK_THROWS_AS(deserialize_boundary(replace_once(doc, "\"inner\"", "\"innr\"")), InputError);
    CHECK_THROWS_AS(deserialize_boundary(serialize_field(syn.metric, FieldKind::metric)), InputError);
    CHECK_THROWS_AS(deserialize_field(doc), InputError);
}

TEST_CASE("factorization documents")
{
    const SyntheticFlat syn = synthetic_flat({2, 1, 0.15, test::diag2(0.2, -0.1), 2}, test::annulus(16, 32));
    FactorOptions coarse;
    coarse.tol_unitary = 1e-3;
    const FactorizationResult f = factorize_annulus(syn.metric, coarse);
    const std::string doc = serialize_factorization(f);
    CHECK(doc.find("\"format\": \"fhm-factorization/1\"") != std::string::npos);
    const FactorizationResult back = deserialize_factorization(doc);
    CHECK(bitwise_equal(back.k, f.k));
    CHECK(back.a == f.a);
    CHECK(back.base_node == f.base_node);
    CHECK(back.periodicity_defect == f.periodicity_defect);
    CHECK(back.monodromy_unitarity_defect == f.monodromy_unitarity_defect);
    CHECK(serialize_factorization(back) == doc);

    CHECK_THROWS_AS(deserialize_factorization(serialize_field(syn.metric, FieldKind::metric)), InputError);
    FactorizationResult skew = f;
    skew.a(0, 1) = cplx(0.5, 0.0);
    skew.a(1, 0) = cplx(-0.5, 0.0);
    CHECK_THROWS_AS(deserialize_factorization(serialize_factorization(skew)), InputError);
}

TEST_CASE("file helpers")
{
    const std::filesystem::path dir = std::filesystem::temp_directory_path() / "fhm_test_io";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "doc.json").string();
    write_text_file(path, "hello\n");
    CHECK(read_text_file(path) == "hello\n");
    CHECK_THROWS_AS(read_text_file((dir / "missing.json").string()), InputError);
    CHECK_THROWS_AS(write_text_file((dir / "no/such/dir/x.json").string(), "x"), InputError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("field kind names")
{
    for (FieldKind k : {FieldKind::metric, FieldKind::matrix, FieldKind::hermitian, FieldKind::scalar, FieldKind::boundary})
        CHECK(field_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(field_kind_from_string("vector"), InputError);
}
