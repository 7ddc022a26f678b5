#pragma once

#include <string>
#include <string_view>

#include "fhm/factorization.hpp"
#include "fhm/fields.hpp"

namespace fhm {

inline constexpr std::string_view kFieldFormat = "fhm-field/1";
inline constexpr std::string_view kFactorizationFormat = "fhm-factorization/1";

enum class FieldKind { metric, matrix, hermitian, scalar, boundary };

std::string_view to_string(FieldKind kind);
/// Throws InputError on an unknown name.
FieldKind field_kind_from_string(std::string_view name);

/// Text document with a header (format, kind, domain, grid, dim) and a flat
/// "data" array: node-major, row-major within a node, real part before
/// imaginary part. Every number is written with 17 significant digits, so
/// deserialize(serialize(x)) == x bit for bit.
std::string serialize_field(const MatrixField& field, FieldKind kind);

struct FieldDocument {
    FieldKind kind;
    MatrixField field;
};

/// Parses a field document and checks the values against its kind: Hermitian
/// for hermitian, positive definite for metric, 1 x 1 and real for scalar.
/// Throws InputError with a diagnostic naming the offending entry.
FieldDocument deserialize_field(std::string_view text);
/// deserialize_field restricted to kind "metric".
MetricField deserialize_metric(std::string_view text);

/// Boundary documents carry "outer" and, on the annulus, "inner" sample
/// arrays instead of "data"; the grid header holds n_ang only.
std::string serialize_boundary(const BoundaryData& data);
BoundaryData deserialize_boundary(std::string_view text);

std::string serialize_factorization(const FactorizationResult& fact);
FactorizationResult deserialize_factorization(std::string_view text);

/// Throws InputError when the file cannot be read.
std::string read_text_file(const std::string& path);
/// Throws InputError when the file cannot be written.
void write_text_file(const std::string& path, std::string_view text);

/// Decimal text of x with 17 significant digits; negative zero is written
/// "-0.0" so it survives parsers that read "-0" as an integer.
std::string format_real(double x);

}  // namespace fhm
