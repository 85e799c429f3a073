// Serialization: the text matrix format, quadrature rule files, model
// directories (JSON manifest + matrix payloads), balance reports, decay
// CSVs, run manifests with content hashes, and the flat key=value config
// format.
//
// Float formatting is %.17g in the C locale throughout, so identical inputs
// produce byte-identical files.

#ifndef BALMET_IO_HPP
#define BALMET_IO_HPP

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "balmet/balance.hpp"
#include "balmet/ruled.hpp"

namespace balmet {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Formatting and hashing
// ---------------------------------------------------------------------------

inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Write via a temp file and rename, so readers never observe a partial file.
inline void atomic_write(const fs::path& path, const std::string& data) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << data;
    }
    fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Matrix text format: "rows cols" header, then rows of "re im" pairs
// ---------------------------------------------------------------------------

inline std::string matrix_to_text(const Matrix& M) {
    std::ostringstream out;
    out << M.rows() << " " << M.cols() << "\n";
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            if (j) out << " ";
            out << fmt17(M(i, j).real()) << " " << fmt17(M(i, j).imag());
        }
        out << "\n";
    }
    return out.str();
}

inline Matrix matrix_from_text(const std::string& text) {
    std::istringstream in(text);
    Eigen::Index rows = 0, cols = 0;
    if (!(in >> rows >> cols) || rows < 0 || cols < 0)
        throw std::runtime_error("matrix_from_text: bad header");
    Matrix M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) {
            double re, im;
            if (!(in >> re >> im)) throw std::runtime_error("matrix_from_text: truncated data");
            M(i, j) = Complex(re, im);
        }
    return M;
}

inline void write_matrix(const fs::path& path, const Matrix& M) {
    atomic_write(path, matrix_to_text(M));
}
inline Matrix read_matrix(const fs::path& path) { return matrix_from_text(read_file(path)); }

// ---------------------------------------------------------------------------
// Quadrature rule files
// ---------------------------------------------------------------------------

inline std::string rule_to_text(const QuadratureRule& rule) {
    std::ostringstream out;
    out << rule.r << " " << rule.level << " " << rule.seed << " " << rule.targetDegree
        << "\n";
    for (int p = 0; p < rule.count(); ++p) {
        out << fmt17(rule.weights(p));
        for (int a = 0; a < rule.r; ++a)
            out << " " << fmt17(rule.points(a, p).real()) << " "
                << fmt17(rule.points(a, p).imag());
        out << "\n";
    }
    return out.str();
}

inline QuadratureRule rule_from_text(const std::string& text) {
    std::istringstream in(text);
    QuadratureRule rule;
    if (!(in >> rule.r >> rule.level >> rule.seed >> rule.targetDegree))
        throw std::runtime_error("rule_from_text: bad header");
    rule.scheme = rule.targetDegree > 0 ? QuadScheme::Product : QuadScheme::MonteCarlo;
    std::vector<double> w;
    std::vector<Complex> pts;
    double wp;
    while (in >> wp) {
        w.push_back(wp);
        for (int a = 0; a < rule.r; ++a) {
            double re, im;
            if (!(in >> re >> im)) throw std::runtime_error("rule_from_text: truncated row");
            pts.emplace_back(re, im);
        }
    }
    const int P = static_cast<int>(w.size());
    rule.weights = Eigen::Map<Eigen::VectorXd>(w.data(), P);
    rule.points.resize(rule.r, P);
    for (int p = 0; p < P; ++p)
        for (int a = 0; a < rule.r; ++a) rule.points(a, p) = pts[p * rule.r + a];
    return rule;
}

// ---------------------------------------------------------------------------
// Model directories
// ---------------------------------------------------------------------------

/// Layout: manifest.json, mesh.txt (chart re(z) im(z) weight rows),
/// sections.txt ((P*fiberRank) x N), metric.txt ((P*fiberRank) x fiberRank),
/// lweights.txt (P x 2: g, g^k). Frames are the per-chart trivializations
/// documented in the manifest.
inline void save_model_dir(const fs::path& dir, const Model& model) {
    fs::create_directories(dir);
    const int P = model.mesh.size();
    const int r = model.fiberRank;

    std::ostringstream mesh;
    mesh << P << "\n";
    for (int p = 0; p < P; ++p)
        mesh << model.mesh.points[p].chart << " " << fmt17(model.mesh.points[p].z.real())
             << " " << fmt17(model.mesh.points[p].z.imag()) << " "
             << fmt17(model.mesh.weights(p)) << "\n";
    atomic_write(dir / "mesh.txt", mesh.str());

    Matrix sections(P * r, model.sample.N);
    Matrix metric(P * r, r);
    Matrix lw(P, 2);
    for (int p = 0; p < P; ++p) {
        sections.middleRows(p * r, r) = model.sample.values[p];
        metric.middleRows(p * r, r) = model.referenceField[p];
        const auto& pt = model.mesh.points[p];
        lw(p, 0) = model.gWeight ? model.gWeight(pt.chart, pt.z) : 1.0;
        lw(p, 1) = model.gkWeight ? model.gkWeight(pt.chart, pt.z) : 1.0;
    }
    write_matrix(dir / "sections.txt", sections);
    write_matrix(dir / "metric.txt", metric);
    write_matrix(dir / "lweights.txt", lw);

    json man;
    man["format"] = "balmet-model-v1";
    man["kind"] = model.spec.kind == ModelKind::P1Split ? "p1-split" : "torus-line";
    man["degrees"] = model.spec.degrees;
    man["tau"] = {model.spec.tau.real(), model.spec.tau.imag()};
    man["d0"] = model.spec.d0;
    man["k"] = model.spec.k;
    man["d"] = model.sample.d;
    man["N"] = model.sample.N;
    man["fiberRank"] = r;
    man["meshSize"] = model.spec.meshSize;
    man["slope"] = model.slope;
    man["hermitianEinstein"] = model.hermitianEinstein;
    man["bundleTag"] = model.sample.bundleTag;
    man["frames"] =
        "per-chart trivializations; P^1 charts 0:z, 1:w=1/z; torus single chart";
    man["payloads"] = {"mesh.txt", "sections.txt", "metric.txt", "lweights.txt"};
    atomic_write(dir / "manifest.json", man.dump(2) + "\n");
}

/// Loads the mesh/section/metric data. Closed-form evaluators are not
/// reconstructed for external data: balancing works, operations needing
/// finite differences of the model require generated models.
inline Model load_model_dir(const fs::path& dir) {
    json man = json::parse(read_file(dir / "manifest.json"));
    if (man.at("format") != "balmet-model-v1")
        throw std::runtime_error("load_model_dir: unknown format");
    Model model;
    model.spec.kind = man.at("kind") == "p1-split" ? ModelKind::P1Split : ModelKind::TorusLine;
    model.spec.degrees = man.value("degrees", std::vector<int>{});
    model.spec.tau = Complex(man.at("tau")[0], man.at("tau")[1]);
    model.spec.d0 = man.at("d0");
    model.spec.k = man.at("k");
    model.spec.meshSize = man.at("meshSize");
    model.fiberRank = man.at("fiberRank");
    model.slope = man.at("slope");
    model.hermitianEinstein = man.at("hermitianEinstein");

    std::istringstream mesh(read_file(dir / "mesh.txt"));
    int P = 0;
    mesh >> P;
    model.mesh.points.resize(P);
    model.mesh.weights.resize(P);
    for (int p = 0; p < P; ++p) {
        double re, im;
        mesh >> model.mesh.points[p].chart >> re >> im >> model.mesh.weights(p);
        model.mesh.points[p].z = Complex(re, im);
    }
    model.mesh.totalVolume = model.mesh.weights.sum();

    const Matrix sections = read_matrix(dir / "sections.txt");
    const Matrix metric = read_matrix(dir / "metric.txt");
    const int r = model.fiberRank;
    model.sample.bundleTag = man.at("bundleTag");
    model.sample.N = man.at("N");
    model.sample.k = model.spec.k;
    model.sample.d = man.at("d");
    model.sample.fiberRank = r;
    for (int p = 0; p < P; ++p) {
        model.sample.values.push_back(sections.middleRows(p * r, r));
        model.referenceField.push_back(metric.middleRows(p * r, r));
    }
    return model;
}

// ---------------------------------------------------------------------------
// Balance reports and decay tables
// ---------------------------------------------------------------------------

inline json balance_report_json(const BalanceReport& rep) {
    json j;
    j["iterations"] = rep.iterations;
    j["converged"] = rep.converged;
    j["residualHistory"] = rep.residualHistory;
    j["wallTimeSeconds"] = rep.wallTimeSeconds;
    j["gramConditionNumber"] = rep.gramConditionNumber;
    j["balancedConstant"] = rep.balancedConstant;
    return j;
}

inline std::string decay_csv(const DecayProbeReport& rep) {
    std::ostringstream out;
    out << "k,N,D,Dnorm,opNormM,slope\n";
    for (const auto& row : rep.rows) {
        out << row.k << "," << row.N << "," << fmt17(row.D) << "," << fmt17(row.Dnorm) << ","
            << fmt17(row.opNormM) << ",";
        out << (std::isnan(row.slope) ? std::string("nan") : fmt17(row.slope));
        out << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Flat key = value configs
// ---------------------------------------------------------------------------

struct Config {
    std::map<std::string, std::string> values;

    bool has(const std::string& key) const { return values.count(key) > 0; }

    std::string get(const std::string& key, const std::string& fallback) const {
        auto it = values.find(key);
        return it == values.end() ? fallback : it->second;
    }

    std::string require(const std::string& key) const {
        auto it = values.find(key);
        if (it == values.end())
            throw std::runtime_error("config: missing required key '" + key + "'");
        return it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values.find(key);
        if (it == values.end()) return fallback;
        try {
            size_t pos = 0;
            double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw std::runtime_error("config: key '" + key + "' is not a number: '" +
                                     it->second + "'");
        }
    }

    int get_int(const std::string& key, int fallback) const {
        const double v = get_double(key, fallback);
        if (v != std::floor(v))
            throw std::runtime_error("config: key '" + key + "' is not an integer");
        return static_cast<int>(v);
    }
};

/// One "dotted.key = value" per line; '#' starts a comment; blank lines ok.
inline Config parse_config(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config parse error at line " + std::to_string(lineno) +
                                     ": expected 'key = value'");
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("config parse error at line " + std::to_string(lineno) +
                                     ": empty key");
        cfg.values[key] = val;
    }
    return cfg;
}

/// Parse a range "a..b" or a comma list "a,b,c" into integers.
inline std::vector<int> parse_k_range(const std::string& text) {
    std::vector<int> out;
    const auto dots = text.find("..");
    try {
        if (dots != std::string::npos) {
            const int a = std::stoi(text.substr(0, dots));
            const int b = std::stoi(text.substr(dots + 2));
            if (b < a) throw std::runtime_error("");
            for (int k = a; k <= b; ++k) out.push_back(k);
        } else {
            std::istringstream in(text);
            std::string piece;
            while (std::getline(in, piece, ',')) out.push_back(std::stoi(piece));
        }
    } catch (...) {
        throw std::runtime_error("malformed kRange '" + text + "': expected a..b or a,b,c");
    }
    if (out.empty()) throw std::runtime_error("malformed kRange: empty");
    return out;
}

// ---------------------------------------------------------------------------
// Run manifests
// ---------------------------------------------------------------------------

class RunManifest {
public:
    explicit RunManifest(const fs::path& outDir) : dir_(outDir) {
        manifest_["format"] = "balmet-run-v1";
        manifest_["version"] = "0.1.0";
        manifest_["config"] = json::object();
        manifest_["inputHashes"] = json::object();
        manifest_["stages"] = json::array();
        manifest_["artifacts"] = json::array();
    }

    void set_config(const Config& cfg) {
        for (const auto& [k, v] : cfg.values) manifest_["config"][k] = v;
    }

    void add_input_hash(const std::string& name, const std::string& content) {
        manifest_["inputHashes"][name] = sha256_hex(content);
    }

    void add_stage(const std::string& name, const std::string& status, double seconds) {
        manifest_["stages"].push_back({{"name", name}, {"status", status},
                                       {"wallTimeSeconds", seconds}});
    }

    /// Writes the artifact under the run directory and records its hash.
    void emit(const std::string& relPath, const std::string& content) {
        atomic_write(dir_ / relPath, content);
        manifest_["artifacts"].push_back(
            {{"path", relPath}, {"sha256", sha256_hex(content)}});
    }

    void finalize() { atomic_write(dir_ / "manifest.json", manifest_.dump(2) + "\n"); }

    const fs::path& dir() const { return dir_; }
    const json& data() const { return manifest_; }

private:
    fs::path dir_;
    json manifest_;
};

/// Merge every run manifest under root into one summary; throws on corrupt
/// manifests before writing anything.
inline json merge_run_manifests(const fs::path& root) {
    json summary;
    summary["format"] = "balmet-summary-v1";
    summary["runs"] = json::array();
    int rows = 0;
    std::vector<fs::path> manifests;
    if (fs::exists(root))
        for (const auto& entry : fs::recursive_directory_iterator(root))
            if (entry.is_regular_file() && entry.path().filename() == "manifest.json")
                manifests.push_back(entry.path());
    std::sort(manifests.begin(), manifests.end());
    for (const auto& path : manifests) {
        json man;
        try {
            man = json::parse(read_file(path));
            if (man.at("format") != "balmet-run-v1") continue;  // not a run manifest
        } catch (const std::exception& e) {
            throw std::runtime_error("corrupt manifest " + path.string() + ": " + e.what());
        }
        for (const auto& art : man.at("artifacts")) {
            const fs::path apath = path.parent_path() / art.at("path").get<std::string>();
            if (!fs::exists(apath))
                throw std::runtime_error("manifest " + path.string() +
                                         " references missing artifact " + apath.string());
            if (sha256_hex(read_file(apath)) != art.at("sha256").get<std::string>())
                throw std::runtime_error("artifact hash mismatch: " + apath.string());
        }
        json entry;
        entry["manifest"] = fs::relative(path, root).string();
        entry["run"] = man;
        // Count CSV data rows across artifacts for the summary.
        int runRows = 0;
        for (const auto& art : man.at("artifacts")) {
            const std::string p = art.at("path").get<std::string>();
            if (p.size() > 4 && p.substr(p.size() - 4) == ".csv") {
                const std::string body = read_file(path.parent_path() / p);
                runRows += static_cast<int>(std::count(body.begin(), body.end(), '\n')) - 1;
            }
        }
        entry["csvRows"] = runRows;
        rows += runRows;
        summary["runs"].push_back(entry);
    }
    summary["totalCsvRows"] = rows;
    return summary;
}

}  // namespace balmet

#endif  // BALMET_IO_HPP
