#pragma once

// File formats of the command-line surface.
//
// System file: one JSON document with fields {n, m, d, W, V, readout};
// complex numbers are two-element arrays [re, im], matrices are row-major
// nested arrays. Readout: {pre_transform, linear, constant, poly_terms}.
//
// Stream file: CSV with a "# M=<bound>" metadata line, a header row
// c1_re,c1_im,...,cm_re,cm_im, then one row per time step (most recent
// last).
//
// Trace file: CSV with columns t, x1_re, x1_im, ..., y1_re, y1_im, ...
//
// Reports (closeness, budget): JSON mirroring the in-memory structs.
// All numbers are written with shortest round-trip precision, so identical
// inputs produce byte-identical files.

#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scrkit/complex_matrix.hpp"
#include "scrkit/errors.hpp"
#include "scrkit/harness.hpp"
#include "scrkit/pipeline.hpp"
#include "scrkit/reservoir.hpp"

namespace scrkit {

using Json = nlohmann::ordered_json;

inline Json complex_to_json(const Complex& z) { return Json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const Json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw InputError("expected a complex number as [re, im]");
    }
    return Complex(j[0].get<double>(), j[1].get<double>());
}

inline Json matrix_to_json(const ComplexMatrix& m) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline ComplexMatrix matrix_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) throw InputError("expected a non-empty matrix array");
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].size();
    ComplexMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols) throw InputError("ragged matrix rows");
        for (std::size_t c = 0; c < cols; ++c) m(i, c) = complex_from_json(j[i][c]);
    }
    if (!m.is_finite()) throw InputError("matrix contains non-finite entries");
    return m;
}

inline Json vector_to_json(const ComplexVector& v) {
    Json out = Json::array();
    for (const Complex& z : v) out.push_back(complex_to_json(z));
    return out;
}

inline ComplexVector vector_from_json(const Json& j) {
    if (!j.is_array()) throw InputError("expected a vector array");
    ComplexVector v;
    v.reserve(j.size());
    for (const Json& e : j) v.push_back(complex_from_json(e));
    return v;
}

inline Json readout_to_json(const Readout& h) {
    Json j;
    j["pre_transform"] = h.pre_transform ? matrix_to_json(*h.pre_transform) : Json(nullptr);
    j["linear"] = matrix_to_json(h.linear);
    j["constant"] = vector_to_json(h.constant);
    Json terms = Json::array();
    for (const Readout::PolyTerm& t : h.poly_terms) {
        Json term;
        term["exponents"] = t.exponents;
        term["coeff"] = complex_to_json(t.coeff);
        term["output"] = t.output;
        terms.push_back(std::move(term));
    }
    j["poly_terms"] = std::move(terms);
    return j;
}

inline Readout readout_from_json(const Json& j) {
    Readout h;
    if (j.contains("pre_transform") && !j["pre_transform"].is_null()) {
        h.pre_transform = matrix_from_json(j["pre_transform"]);
    }
    h.linear = matrix_from_json(j.at("linear"));
    h.constant = vector_from_json(j.at("constant"));
    if (j.contains("poly_terms")) {
        for (const Json& term : j["poly_terms"]) {
            Readout::PolyTerm t;
            t.exponents = term.at("exponents").get<std::vector<unsigned>>();
            t.coeff = complex_from_json(term.at("coeff"));
            t.output = term.at("output").get<std::size_t>();
            h.poly_terms.push_back(std::move(t));
        }
    }
    return h;
}

inline Json system_to_json(const LinearReservoirSystem& r) {
    Json j;
    j["n"] = r.state_dim();
    j["m"] = r.input_dim();
    j["d"] = r.output_dim();
    j["W"] = matrix_to_json(r.w);
    j["V"] = matrix_to_json(r.v);
    j["readout"] = readout_to_json(r.readout);
    return j;
}

inline LinearReservoirSystem system_from_json(const Json& j) {
    ComplexMatrix w = matrix_from_json(j.at("W"));
    ComplexMatrix v = matrix_from_json(j.at("V"));
    Readout h = readout_from_json(j.at("readout"));
    if (j.contains("n") && j["n"].get<std::size_t>() != w.rows()) {
        throw InputError("system file: field n disagrees with W");
    }
    if (j.contains("m") && j["m"].get<std::size_t>() != v.cols()) {
        throw InputError("system file: field m disagrees with V");
    }
    LinearReservoirSystem r = make_system(std::move(w), std::move(v), std::move(h));
    if (j.contains("d") && j["d"].get<std::size_t>() != r.output_dim()) {
        throw InputError("system file: field d disagrees with the readout");
    }
    return r;
}

inline void save_system(const LinearReservoirSystem& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open for writing: " + path);
    out << system_to_json(r).dump(2) << "\n";
}

inline LinearReservoirSystem load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open: " + path);
    Json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError("parse failure in " + path + ": " + e.what());
    }
    try {
        return system_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw InputError("malformed system file " + path + ": " + e.what());
    }
}

namespace detail {

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

} // namespace detail

inline void save_stream(const InputStream& u, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open for writing: " + path);
    out << "# M=" << detail::format_double(u.bound) << "\n";
    for (std::size_t j = 0; j < u.m; ++j) {
        out << (j ? "," : "") << "c" << (j + 1) << "_re,c" << (j + 1) << "_im";
    }
    out << "\n";
    for (const ComplexVector& c : u.samples) {
        for (std::size_t j = 0; j < u.m; ++j) {
            out << (j ? "," : "") << detail::format_double(c[j].real()) << ","
                << detail::format_double(c[j].imag());
        }
        out << "\n";
    }
}

inline InputStream load_stream(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open: " + path);
    std::string line;
    std::size_t line_no = 0;
    double bound = 0.0;
    bool have_bound = false;
    std::size_t m = 0;
    std::vector<ComplexVector> samples;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto pos = line.find("M=");
            if (pos == std::string::npos) {
                throw InputError(path + ":" + std::to_string(line_no) + ": metadata line without M=");
            }
            try {
                bound = std::stod(line.substr(pos + 2));
            } catch (const std::exception&) {
                throw InputError(path + ":" + std::to_string(line_no) + ": cannot parse M");
            }
            have_bound = true;
            continue;
        }
        const auto fields = detail::split_csv_line(line);
        if (m == 0) {
            // Header row.
            if (fields.empty() || fields.size() % 2 != 0) {
                throw InputError(path + ":" + std::to_string(line_no) +
                                 ": header must hold re/im column pairs");
            }
            m = fields.size() / 2;
            continue;
        }
        if (fields.size() != 2 * m) {
            throw InputError(path + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(2 * m) + " fields, got " + std::to_string(fields.size()));
        }
        ComplexVector c(m);
        for (std::size_t j = 0; j < m; ++j) {
            try {
                c[j] = Complex(std::stod(fields[2 * j]), std::stod(fields[2 * j + 1]));
            } catch (const std::exception&) {
                throw InputError(path + ":" + std::to_string(line_no) + ": cannot parse field " +
                                 std::to_string(2 * j + 1));
            }
        }
        samples.push_back(std::move(c));
    }
    if (!have_bound) throw InputError(path + ": missing '# M=' metadata line");
    if (m == 0) throw InputError(path + ": missing header row");
    try {
        return make_stream(m, bound, std::move(samples));
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

inline void save_trace(const SimulationResult& sim, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open for writing: " + path);
    const std::size_t n = sim.states.empty() ? 0 : sim.states[0].size();
    const std::size_t d = sim.outputs.empty() ? 0 : sim.outputs[0].size();
    out << "t";
    for (std::size_t j = 0; j < n; ++j) out << ",x" << (j + 1) << "_re,x" << (j + 1) << "_im";
    for (std::size_t j = 0; j < d; ++j) out << ",y" << (j + 1) << "_re,y" << (j + 1) << "_im";
    out << "\n";
    for (std::size_t t = 0; t < sim.states.size(); ++t) {
        out << (t + 1);
        for (const Complex& z : sim.states[t]) {
            out << "," << detail::format_double(z.real()) << "," << detail::format_double(z.imag());
        }
        for (const Complex& z : sim.outputs[t]) {
            out << "," << detail::format_double(z.real()) << "," << detail::format_double(z.imag());
        }
        out << "\n";
    }
}

inline Json closeness_report_to_json(const ClosenessReport& r) {
    Json j;
    j["stream_count"] = r.stream_count;
    j["stream_length"] = r.stream_length;
    j["bound_M"] = r.bound_m;
    j["max_deviation"] = r.max_deviation;
    j["argmax_stream"] = r.argmax_stream;
    j["argmax_time"] = r.argmax_time;
    j["tail_bound"] = r.tail_bound;
    j["epsilon"] = r.epsilon;
    j["verdict"] = r.pass ? "pass" : "fail";
    return j;
}

inline Json budget_to_json(const ErrorBudget& b) {
    Json j;
    j["epsilon_total"] = b.epsilon_total;
    j["lambda"] = b.lambda;
    j["bound_M"] = b.bound_m;
    j["lipschitz"] = b.lipschitz;
    Json stages = Json::array();
    for (const StageBudget& s : b.per_stage) {
        Json stage;
        stage["stage"] = s.name;
        stage["epsilon"] = s.epsilon;
        stage["delta"] = s.delta;
        stage["certificate"] = s.certificate;
        stage["skipped"] = s.skipped;
        stage["empirical"] = s.empirical;
        stage["dimension"] = s.dimension;
        stages.push_back(std::move(stage));
    }
    j["per_stage"] = std::move(stages);
    j["stage_dimensions"] = b.stage_dimensions;
    const auto put_opt = [&j](const char* key, const std::optional<std::size_t>& v) {
        j[key] = v ? Json(*v) : Json(nullptr);
    };
    put_opt("dilation_horizon", b.dilation_horizon);
    put_opt("cyclize_tail_horizon", b.cyclize_tail_horizon);
    j["delta0"] = b.delta0 ? Json(*b.delta0) : Json(nullptr);
    put_opt("ell0", b.ell0);
    put_opt("n1", b.n1);
    put_opt("rational_denominator", b.rational_denominator);
    put_opt("k", b.k);
    put_opt("k_r", b.k_r);
    put_opt("k_i", b.k_i);
    return j;
}

inline Json pipeline_result_to_json(const PipelineResult& r) {
    Json j;
    j["target"] = to_string(r.target);
    j["mode"] = to_string(r.mode);
    j["certificate_total"] = r.certificate_total();
    j["budget"] = budget_to_json(r.budget);
    return j;
}

inline void save_json(const Json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

} // namespace scrkit
