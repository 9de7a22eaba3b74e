#pragma once

#include <string>
#include <vector>

#include "levyhom/effective.hpp"
#include "levyhom/environment.hpp"
#include "levyhom/grid.hpp"

namespace levyhom {

// Flat binary field snapshot: magic "LVHF", u32 version, u32 dim, u32 n,
// f64 period, then n^dim f64 values in row-major order.
void write_field_binary(const std::string& path, const Field& field);
Field read_field_binary(const std::string& path);

// CSV with one index column per axis plus the value; header comment carries
// the config hash when provided.
void write_field_csv(const std::string& path, const Field& field,
                     const std::string& config_hash = "");

// mode list: m_1..m_d, j, l, amplitude, phase
void write_stream_csv(const std::string& path, const StreamField& stream,
                      const std::string& config_hash = "");
StreamField read_stream_csv(const std::string& path, int dim, double period);

void write_effective_csv(const std::string& path, const EffectiveMatrix& a,
                         const std::string& config_hash = "");
EffectiveMatrix read_effective_csv(const std::string& path);

// generic CSV writing with deterministic %.17g formatting
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::string& config_hash);
    ~CsvWriter();
    void header(const std::vector<std::string>& cols);
    void row(const std::vector<double>& vals);
    void row_tagged(const std::string& tag, const std::vector<double>& vals);

private:
    struct Impl;
    Impl* impl_;
};

std::string format_double(double v);

// atomic write: temp file in the same directory, then rename
void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace levyhom
