// pstest command-line front end: CSV in, test reports / simulation tables out.
// Talks to the library exclusively through the C API.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <pstest/pstest.h>

using ordered_json = nlohmann::ordered_json;

namespace {

struct CliError {
    int code;
    std::string message;
};

[[noreturn]] void die(int code, const std::string& message) { throw CliError{code, message}; }

[[noreturn]] void die_input(const std::string& message) {
    die(PSTEST_ERROR_INVALID_INPUT, message);
}

void check(pstest_status status) {
    if (status != PSTEST_OK)
        die(static_cast<int>(status),
            std::string(pstest_status_name(status)) + ": " + pstest_last_error());
}

std::string fx(double v, int prec) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
    return buf;
}

std::string fe(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3e", v);
    return buf;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

/* ---- strict CSV ---------------------------------------------------------- */

struct CsvTable {
    std::vector<std::string> names;            // header, in file order
    std::vector<std::vector<double>> columns;  // column-major
    std::vector<std::vector<std::string>> raw; // original tokens, for diagnostics
    std::size_t rows = 0;
};

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(trim(line.substr(start)));
            return out;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
}

double parse_number(const std::string& token, std::size_t line_no, std::size_t col_no,
                    const std::string& col_name) {
    const auto where = "line " + std::to_string(line_no) + ", column " +
                       std::to_string(col_no) + " ('" + col_name + "')";
    if (token.empty()) die_input(where + ": empty field");
    double value = 0.0;
    const char* first = token.data();
    const char* last = first + token.size();
    if (*first == '+') ++first;  // from_chars rejects a leading plus
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        die_input(where + ": cannot parse '" + token + "' as a number");
    if (!std::isfinite(value)) die_input(where + ": value '" + token + "' is not finite");
    return value;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) die_input("cannot open input file '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) text.erase(0, 3);

    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t pos = text.find('\n', start);
        std::string line =
            pos == std::string::npos ? text.substr(start) : text.substr(start, pos - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) die_input("'" + path + "': missing header row (file is empty)");

    CsvTable table;
    table.names = split(lines[0], ',');
    if (table.names.size() < 2)
        die_input("'" + path + "': header row must name at least two columns");
    for (std::size_t j = 0; j < table.names.size(); ++j) {
        if (table.names[j].empty())
            die_input("'" + path + "': header column " + std::to_string(j + 1) +
                      " has an empty name");
        bool numeric = !table.names[j].empty() &&
                       table.names[j].find_first_not_of("0123456789+-.eE") == std::string::npos;
        if (numeric)
            die_input("'" + path + "': header column " + std::to_string(j + 1) + " ('" +
                      table.names[j] + "') looks like data — missing header row?");
        for (std::size_t i = 0; i < j; ++i)
            if (table.names[i] == table.names[j])
                die_input("'" + path + "': duplicate column name '" + table.names[j] + "'");
    }

    const std::size_t k = table.names.size();
    table.columns.assign(k, {});
    table.raw.assign(k, {});
    for (std::size_t r = 1; r < lines.size(); ++r) {
        if (lines[r].empty())
            die_input("'" + path + "': line " + std::to_string(r + 1) + " is empty");
        std::vector<std::string> fields = split(lines[r], ',');
        if (fields.size() != k)
            die_input("'" + path + "': line " + std::to_string(r + 1) + " has " +
                      std::to_string(fields.size()) + " fields, expected " + std::to_string(k));
        for (std::size_t j = 0; j < k; ++j) {
            table.columns[j].push_back(parse_number(fields[j], r + 1, j + 1, table.names[j]));
            table.raw[j].push_back(fields[j]);
        }
        ++table.rows;
    }
    if (table.rows == 0) die_input("'" + path + "': no data rows after the header");
    return table;
}

std::size_t find_column(const CsvTable& table, const std::string& name,
                        const std::string& path) {
    for (std::size_t j = 0; j < table.names.size(); ++j)
        if (table.names[j] == name) return j;
    die_input("'" + path + "': column '" + name + "' not found in header");
}

/* ---- dataset assembly ---------------------------------------------------- */

struct DatasetHandle {
    pstest_dataset* ptr = nullptr;
    ~DatasetHandle() { pstest_dataset_free(ptr); }
};
struct FitHandle {
    pstest_fit* ptr = nullptr;
    ~FitHandle() { pstest_fit_free(ptr); }
};
struct TestHandle {
    pstest_test* ptr = nullptr;
    ~TestHandle() { pstest_test_free(ptr); }
};
struct TableHandle {
    pstest_table* ptr = nullptr;
    ~TableHandle() { pstest_table_free(ptr); }
};
struct EcdfHandle {
    pstest_ecdf* ptr = nullptr;
    ~EcdfHandle() { pstest_ecdf_free(ptr); }
};

struct DataConfig {
    std::string input;
    std::string treatment;
    std::vector<std::string> covariates;  // empty = all non-treatment columns
    bool intercept = true;
    std::string link = "probit";
    std::string method = "mle";
};

struct BuiltDataset {
    DatasetHandle dataset;
    std::vector<std::string> design_names;  // includes "intercept" when added
    std::vector<std::string> covariates;    // covariate columns actually used
    std::int64_t n = 0;
};

pstest_link parse_link(const std::string& s) {
    if (s == "probit") return PSTEST_LINK_PROBIT;
    if (s == "logit") return PSTEST_LINK_LOGIT;
    die_input("unknown link '" + s + "' (expected probit or logit)");
}

pstest_method parse_method(const std::string& s) {
    if (s == "mle") return PSTEST_METHOD_MLE;
    if (s == "nlls") return PSTEST_METHOD_NLLS;
    die_input("unknown method '" + s + "' (expected mle or nlls)");
}

BuiltDataset build_dataset(const DataConfig& cfg) {
    CsvTable table = read_csv(cfg.input);
    const std::size_t treat_col = find_column(table, cfg.treatment, cfg.input);

    BuiltDataset built;
    if (cfg.covariates.empty()) {
        for (std::size_t j = 0; j < table.names.size(); ++j)
            if (j != treat_col) built.covariates.push_back(table.names[j]);
    } else {
        for (const std::string& name : cfg.covariates) {
            if (name == cfg.treatment)
                die_input("treatment column '" + name + "' may not be used as a covariate");
            for (const std::string& seen : built.covariates)
                if (seen == name) die_input("duplicate covariate column '" + name + "'");
            find_column(table, name, cfg.input);
            built.covariates.push_back(name);
        }
    }
    if (built.covariates.empty())
        die_input("no covariate columns left after excluding the treatment column");
    if (cfg.intercept)
        for (const std::string& name : built.covariates)
            if (name == "intercept")
                die_input("a column named 'intercept' conflicts with the automatic intercept "
                          "column; pass --no-intercept or rename it");

    const std::size_t n = table.rows;
    const std::vector<double>& d = table.columns[treat_col];
    for (std::size_t i = 0; i < n; ++i)
        if (d[i] != 0.0 && d[i] != 1.0)
            die_input("'" + cfg.input + "': line " + std::to_string(i + 2) +
                      ": treatment value '" + table.raw[treat_col][i] + "' is not 0 or 1");

    if (cfg.intercept) built.design_names.push_back("intercept");
    for (const std::string& name : built.covariates) built.design_names.push_back(name);

    const std::size_t k = built.design_names.size();
    std::vector<double> x(n * k);
    std::size_t col = 0;
    if (cfg.intercept) {
        for (std::size_t i = 0; i < n; ++i) x[i * k] = 1.0;
        col = 1;
    }
    for (const std::string& name : built.covariates) {
        const std::vector<double>& src = table.columns[find_column(table, name, cfg.input)];
        for (std::size_t i = 0; i < n; ++i) x[i * k + col] = src[i];
        ++col;
    }

    std::vector<const char*> name_ptrs;
    for (const std::string& name : built.design_names) name_ptrs.push_back(name.c_str());
    check(pstest_dataset_create(d.data(), x.data(), static_cast<std::int64_t>(n),
                                static_cast<std::int64_t>(k), name_ptrs.data(),
                                &built.dataset.ptr));
    built.n = static_cast<std::int64_t>(n);
    return built;
}

/* ---- report assembly ------------------------------------------------------ */

double quantile(const std::vector<double>& sorted, double p) {
    const double h = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct PropensitySummary {
    double min, q1, median, q3, max, mean;
};

PropensitySummary summarize_propensities(const pstest_fit* fit) {
    const std::int64_t n = pstest_fit_rows(fit);
    std::vector<double> q(static_cast<std::size_t>(n));
    pstest_fit_propensities(fit, q.data());
    double total = 0.0;
    for (double v : q) total += v;
    std::sort(q.begin(), q.end());
    return {q.front(),        quantile(q, 0.25), quantile(q, 0.50),
            quantile(q, 0.75), q.back(),          total / static_cast<double>(n)};
}

ordered_json fit_json(const DataConfig& cfg, const BuiltDataset& built, const pstest_fit* fit) {
    const std::int64_t k = pstest_fit_dim(fit);
    std::vector<double> theta(static_cast<std::size_t>(k));
    pstest_fit_theta(fit, theta.data());
    const PropensitySummary ps = summarize_propensities(fit);

    ordered_json coeffs = ordered_json::array();
    for (std::int64_t j = 0; j < k; ++j)
        coeffs.push_back({{"name", built.design_names[static_cast<std::size_t>(j)]},
                          {"estimate", theta[static_cast<std::size_t>(j)]}});
    ordered_json out;
    out["link"] = cfg.link;
    out["method"] = cfg.method;
    out["n"] = pstest_fit_rows(fit);
    out["coefficients"] = coeffs;
    out["converged"] = pstest_fit_converged(fit) != 0;
    out["iterations"] = pstest_fit_iterations(fit);
    out["gradient_norm"] = pstest_fit_gradient_norm(fit);
    out[cfg.method == "mle" ? "log_likelihood" : "residual_sum_of_squares"] =
        pstest_fit_objective(fit);
    out["propensity"] = {{"min", ps.min}, {"q1", ps.q1},   {"median", ps.median},
                         {"q3", ps.q3},   {"max", ps.max}, {"mean", ps.mean}};
    return out;
}

void fit_text(std::ostream& os, const DataConfig& cfg, const BuiltDataset& built,
              const pstest_fit* fit) {
    const std::int64_t k = pstest_fit_dim(fit);
    std::vector<double> theta(static_cast<std::size_t>(k));
    pstest_fit_theta(fit, theta.data());
    const PropensitySummary ps = summarize_propensities(fit);

    os << "model fit\n---------\n";
    os << "input:         " << cfg.input << "\n";
    os << "observations:  " << pstest_fit_rows(fit) << "\n";
    os << "treatment:     " << cfg.treatment << "\n";
    os << "link:          " << cfg.link << "\n";
    os << "method:        " << cfg.method << "\n";
    os << "converged:     " << (pstest_fit_converged(fit) ? "yes" : "no") << " ("
       << pstest_fit_iterations(fit) << " iterations)\n";
    os << "gradient norm: " << fe(pstest_fit_gradient_norm(fit)) << "\n";
    os << (cfg.method == "mle" ? "log-likelihood: " : "residual sum of squares: ")
       << fx(pstest_fit_objective(fit), 6) << "\n\n";
    std::size_t width = 11;
    for (const std::string& name : built.design_names) width = std::max(width, name.size());
    os << "  " << pad("coefficient", width + 2) << "estimate\n";
    for (std::int64_t j = 0; j < k; ++j)
        os << "  " << pad(built.design_names[static_cast<std::size_t>(j)], width + 2)
           << fx(theta[static_cast<std::size_t>(j)], 6) << "\n";
    os << "\npropensity scores\n";
    os << "  min " << fx(ps.min, 4) << "  q1 " << fx(ps.q1, 4) << "  median "
       << fx(ps.median, 4) << "  q3 " << fx(ps.q3, 4) << "  max " << fx(ps.max, 4) << "  mean "
       << fx(ps.mean, 4) << "\n";
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) die_input("cannot open output file '" + path + "'");
    out << content;
    if (!out) die_input("failed while writing output file '" + path + "'");
}

/* ---- commands -------------------------------------------------------------- */

int cmd_fit(const DataConfig& data_cfg, const std::string& format, const std::string& output) {
    if (format != "text" && format != "json")
        die_input("unknown format '" + format + "' for fit (expected text or json)");
    BuiltDataset built = build_dataset(data_cfg);
    FitHandle fit;
    check(pstest_fit_run(built.dataset.ptr, parse_link(data_cfg.link),
                         parse_method(data_cfg.method), &fit.ptr));
    std::ostringstream os;
    if (format == "json") {
        ordered_json out;
        out["command"] = "fit";
        out["input"] = data_cfg.input;
        out["treatment"] = data_cfg.treatment;
        out["covariates"] = built.covariates;
        out["intercept"] = data_cfg.intercept;
        out["fit"] = fit_json(data_cfg, built, fit.ptr);
        os << out.dump(2) << "\n";
    } else {
        fit_text(os, data_cfg, built, fit.ptr);
    }
    write_output(output, os.str());
    return 0;
}

int cmd_test(const DataConfig& data_cfg, std::int64_t bootstrap, std::uint64_t seed,
             const std::vector<double>& alphas, const std::vector<double>& kernel_c,
             const std::string& format, const std::string& output) {
    if (format != "text" && format != "json")
        die_input("unknown format '" + format + "' for test (expected text or json)");
    if (bootstrap < 1) die_input("--bootstrap must be at least 1");
    for (double a : alphas)
        if (!(a > 0.0 && a < 1.0))
            die_input("alpha values must lie strictly between 0 and 1");
    for (double c : kernel_c)
        if (!(c > 0.0)) die_input("bandwidth constants must be positive");

    BuiltDataset built = build_dataset(data_cfg);
    FitHandle fit;
    check(pstest_fit_run(built.dataset.ptr, parse_link(data_cfg.link),
                         parse_method(data_cfg.method), &fit.ptr));
    TestHandle test;
    check(pstest_test_run(fit.ptr, bootstrap, seed, &test.ptr));

    struct CritRow {
        double alpha, cvm, ks;
    };
    std::vector<CritRow> crits;
    for (double a : alphas) {
        CritRow row{a, 0.0, 0.0};
        check(pstest_test_critical(test.ptr, a, &row.cvm, &row.ks));
        crits.push_back(row);
    }
    std::vector<pstest_kernel_result> kernels;
    for (double c : kernel_c) {
        pstest_kernel_result kr;
        check(pstest_kernel_run(fit.ptr, c, &kr));
        kernels.push_back(kr);
    }

    std::ostringstream os;
    if (format == "json") {
        ordered_json out;
        out["command"] = "test";
        out["input"] = data_cfg.input;
        out["treatment"] = data_cfg.treatment;
        out["covariates"] = built.covariates;
        out["intercept"] = data_cfg.intercept;
        out["fit"] = fit_json(data_cfg, built, fit.ptr);
        out["bootstrap"] = {{"draws", pstest_test_draws(test.ptr)},
                            {"seed", pstest_test_seed(test.ptr)}};
        ordered_json crit_cvm = ordered_json::array();
        ordered_json crit_ks = ordered_json::array();
        for (const CritRow& row : crits) {
            crit_cvm.push_back({{"alpha", row.alpha}, {"value", row.cvm}});
            crit_ks.push_back({{"alpha", row.alpha}, {"value", row.ks}});
        }
        out["cvm"] = {{"statistic", pstest_test_cvm(test.ptr)},
                      {"pval", pstest_test_pval_cvm(test.ptr)},
                      {"critical", crit_cvm}};
        out["ks"] = {{"statistic", pstest_test_ks(test.ptr)},
                     {"pval", pstest_test_pval_ks(test.ptr)},
                     {"critical", crit_ks}};
        ordered_json kj = ordered_json::array();
        for (const pstest_kernel_result& kr : kernels)
            kj.push_back({{"c", kr.c},
                          {"h", kr.h},
                          {"vhat", kr.vhat},
                          {"sigma_hat", kr.sigma_hat},
                          {"t", kr.t},
                          {"pval", kr.pval}});
        out["kernel"] = kj;
        os << out.dump(2) << "\n";
    } else {
        fit_text(os, data_cfg, built, fit.ptr);
        os << "\nprojection test (B=" << pstest_test_draws(test.ptr)
           << ", seed=" << pstest_test_seed(test.ptr) << ")\n";
        os << "---------------\n";
        os << "  " << pad("test", 6) << pad("statistic", 12) << pad("p-value", 9);
        for (const CritRow& row : crits) os << "  crit(" << fx(row.alpha, 2) << ")";
        os << "\n";
        os << "  " << pad("CvM", 6) << pad(fx(pstest_test_cvm(test.ptr), 6), 12)
           << pad(fx(pstest_test_pval_cvm(test.ptr), 4), 9);
        for (const CritRow& row : crits) os << "  " << pad(fx(row.cvm, 6), 10);
        os << "\n";
        os << "  " << pad("KS", 6) << pad(fx(pstest_test_ks(test.ptr), 6), 12)
           << pad(fx(pstest_test_pval_ks(test.ptr), 4), 9);
        for (const CritRow& row : crits) os << "  " << pad(fx(row.ks, 6), 10);
        os << "\n";
        if (!kernels.empty()) {
            os << "\nkernel smoothing test\n";
            os << "---------------------\n";
            os << "  " << pad("c", 6) << pad("h", 9) << pad("t", 10) << "p-value\n";
            for (const pstest_kernel_result& kr : kernels)
                os << "  " << pad(fx(kr.c, 2), 6) << pad(fx(kr.h, 4), 9)
                   << pad(fx(kr.t, 4), 10) << fx(kr.pval, 4) << "\n";
        }
    }
    write_output(output, os.str());
    return 0;
}

/* Flat key=value config file for simulate; '#' starts a comment. */
struct SimulateOptions {
    std::vector<std::int32_t> dgps;
    std::vector<std::int64_t> sizes;
    std::int64_t replications = 1000;
    std::int64_t bootstrap = 499;
    std::vector<double> kernel_c;
    std::vector<double> alphas = {0.05};
    std::uint64_t seed = 0;
    std::string method = "mle";
};

template <typename T>
std::vector<T> parse_list(const std::string& value, const std::string& key) {
    std::vector<T> out;
    for (const std::string& token : split(value, ',')) {
        if (token.empty()) die_input("config: key '" + key + "' has an empty list entry");
        T item{};
        if constexpr (std::is_floating_point_v<T>) {
            item = static_cast<T>(parse_number(token, 0, 0, key));
        } else {
            auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), item);
            if (ec != std::errc() || ptr != token.data() + token.size())
                die_input("config: cannot parse '" + token + "' for key '" + key + "'");
        }
        out.push_back(item);
    }
    return out;
}

void load_config_file(const std::string& path, SimulateOptions& opts) {
    std::ifstream in(path);
    if (!in) die_input("cannot open config file '" + path + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            die_input("config '" + path + "' line " + std::to_string(line_no) +
                      ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty())
            die_input("config '" + path + "' line " + std::to_string(line_no) + ": key '" +
                      key + "' has no value");
        if (key == "dgps")
            opts.dgps = parse_list<std::int32_t>(value, key);
        else if (key == "sizes")
            opts.sizes = parse_list<std::int64_t>(value, key);
        else if (key == "replications")
            opts.replications = parse_list<std::int64_t>(value, key).at(0);
        else if (key == "bootstrap")
            opts.bootstrap = parse_list<std::int64_t>(value, key).at(0);
        else if (key == "kernel_c")
            opts.kernel_c = parse_list<double>(value, key);
        else if (key == "alphas")
            opts.alphas = parse_list<double>(value, key);
        else if (key == "seed")
            opts.seed = static_cast<std::uint64_t>(parse_list<std::int64_t>(value, key).at(0));
        else if (key == "method")
            opts.method = value;
        else
            die_input("config '" + path + "' line " + std::to_string(line_no) +
                      ": unknown key '" + key + "'");
    }
}

int cmd_simulate(const SimulateOptions& opts, const std::string& format,
                 const std::string& output) {
    if (format != "csv" && format != "markdown" && format != "json")
        die_input("unknown format '" + format + "' for simulate (expected csv, markdown, or json)");
    pstest_mc_config cfg{};
    cfg.dgps = opts.dgps.data();
    cfg.n_dgps = static_cast<std::int64_t>(opts.dgps.size());
    cfg.sizes = opts.sizes.data();
    cfg.n_sizes = static_cast<std::int64_t>(opts.sizes.size());
    cfg.replications = opts.replications;
    cfg.bootstrap_draws = opts.bootstrap;
    cfg.kernel_c = opts.kernel_c.empty() ? nullptr : opts.kernel_c.data();
    cfg.n_kernel_c = static_cast<std::int64_t>(opts.kernel_c.size());
    cfg.alphas = opts.alphas.empty() ? nullptr : opts.alphas.data();
    cfg.n_alphas = static_cast<std::int64_t>(opts.alphas.size());
    cfg.seed = opts.seed;
    cfg.method = parse_method(opts.method);

    TableHandle table;
    check(pstest_mc_run(&cfg, &table.ptr));

    std::ostringstream os;
    if (format == "csv") {
        os << pstest_table_csv(table.ptr);
    } else if (format == "markdown") {
        os << pstest_table_markdown(table.ptr);
    } else {
        ordered_json rows = ordered_json::array();
        const std::int64_t count = pstest_table_rows(table.ptr);
        for (std::int64_t i = 0; i < count; ++i) {
            std::int32_t dgp = 0;
            std::int64_t n = 0, rejections = 0, replications = 0, retries = 0, abandoned = 0;
            const char* label = nullptr;
            double alpha = 0.0, rate = 0.0, se = 0.0;
            check(pstest_table_row(table.ptr, i, &dgp, &n, &label, &alpha, &rate, &se,
                                   &rejections, &replications, &retries, &abandoned));
            rows.push_back({{"dgp", dgp},
                            {"n", n},
                            {"test", label},
                            {"alpha", alpha},
                            {"rate", rate},
                            {"mc_se", se},
                            {"rejections", rejections},
                            {"replications", replications},
                            {"retries", retries},
                            {"abandoned", abandoned}});
        }
        ordered_json out;
        out["command"] = "simulate";
        out["replications"] = opts.replications;
        out["bootstrap"] = opts.bootstrap;
        out["seed"] = opts.seed;
        out["method"] = opts.method;
        out["rows"] = rows;
        os << out.dump(2) << "\n";
    }
    write_output(output, os.str());
    return 0;
}

int cmd_ecdf(std::int64_t n, std::uint64_t seed, const std::string& format,
             const std::string& output) {
    if (format != "csv" && format != "json")
        die_input("unknown format '" + format + "' for ecdf (expected csv or json)");
    EcdfHandle ecdf;
    check(pstest_ecdf_run(n, seed, &ecdf.ptr));
    std::ostringstream os;
    if (format == "csv") {
        os << pstest_ecdf_csv(ecdf.ptr);
    } else {
        const std::int64_t m = pstest_ecdf_size(ecdf.ptr);
        std::vector<double> u(static_cast<std::size_t>(m));
        std::vector<double> mis(static_cast<std::size_t>(m));
        std::vector<double> cor(static_cast<std::size_t>(m));
        pstest_ecdf_values(ecdf.ptr, u.data(), mis.data(), cor.data());
        ordered_json out;
        out["command"] = "ecdf";
        out["n"] = n;
        out["seed"] = seed;
        out["u"] = u;
        out["misspecified"] = mis;
        out["correct"] = cor;
        os << out.dump(2) << "\n";
    }
    write_output(output, os.str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"specification tests for parametric propensity-score models"};
    app.set_version_flag("--version", pstest_version());
    app.require_subcommand(1);

    DataConfig data_cfg;
    std::string format_fit = "text";
    std::string format_test = "text";
    std::string format_sim = "csv";
    std::string format_ecdf = "csv";
    std::string output_fit, output_test, output_sim, output_ecdf;
    std::int64_t bootstrap = 999;
    std::uint64_t seed_test = 42;
    std::vector<double> alphas = {0.01, 0.05, 0.10};
    std::vector<double> kernel_c;
    bool no_intercept_fit = false;
    bool no_intercept_test = false;

    auto add_data_flags = [&](CLI::App* cmd, bool& no_intercept) {
        cmd->add_option("--input", data_cfg.input, "input CSV file")->required();
        cmd->add_option("--treatment", data_cfg.treatment, "binary treatment column name")
            ->required();
        cmd->add_option("--covariates", data_cfg.covariates,
                        "covariate column names (default: all other columns)")
            ->delimiter(',');
        cmd->add_option("--link", data_cfg.link, "link function: probit or logit")
            ->default_str("probit");
        cmd->add_option("--method", data_cfg.method, "estimator: mle or nlls")
            ->default_str("mle");
        cmd->add_flag("--no-intercept", no_intercept,
                      "use the covariates as-is without an intercept column");
    };

    CLI::App* fit_cmd = app.add_subcommand("fit", "fit the propensity model and report it");
    add_data_flags(fit_cmd, no_intercept_fit);
    fit_cmd->add_option("--format", format_fit, "output format: text or json");
    fit_cmd->add_option("--output", output_fit, "write the report here instead of stdout");

    CLI::App* test_cmd =
        app.add_subcommand("test", "run the projection specification test on a CSV");
    add_data_flags(test_cmd, no_intercept_test);
    test_cmd->add_option("--bootstrap", bootstrap, "number of multiplier bootstrap draws");
    test_cmd->add_option("--alpha", alphas, "significance levels for critical values")
        ->delimiter(',');
    test_cmd->add_option("--kernel-c", kernel_c,
                         "bandwidth constants for the kernel smoothing test")
        ->delimiter(',');
    test_cmd->add_option("--seed", seed_test, "bootstrap RNG seed");
    test_cmd->add_option("--format", format_test, "output format: text or json");
    test_cmd->add_option("--output", output_test, "write the report here instead of stdout");

    SimulateOptions sim;
    std::string config_path;
    std::vector<std::int32_t> flag_dgps;
    std::vector<std::int64_t> flag_sizes;
    CLI::App* sim_cmd =
        app.add_subcommand("simulate", "run seeded rejection-rate experiments");
    sim_cmd->add_option("--config", config_path, "flat key=value config file");
    auto* opt_dgps =
        sim_cmd->add_option("--dgps", flag_dgps, "data-generating process ids (1-10)")
            ->delimiter(',');
    auto* opt_sizes = sim_cmd->add_option("--sizes", flag_sizes, "sample sizes")->delimiter(',');
    std::int64_t flag_reps = 0;
    std::int64_t flag_boot = 0;
    std::uint64_t flag_seed = 0;
    std::string flag_method;
    auto* opt_reps = sim_cmd->add_option("--reps", flag_reps, "Monte Carlo replications");
    auto* opt_boot =
        sim_cmd->add_option("--bootstrap", flag_boot, "bootstrap draws per replication");
    std::vector<double> flag_kernel_c;
    auto* opt_kc = sim_cmd->add_option("--kernel-c", flag_kernel_c,
                                       "kernel test bandwidth constants (omit to skip)")
                       ->delimiter(',');
    std::vector<double> flag_alphas;
    auto* opt_alpha =
        sim_cmd->add_option("--alpha", flag_alphas, "significance levels")->delimiter(',');
    auto* opt_seed = sim_cmd->add_option("--seed", flag_seed, "master RNG seed");
    auto* opt_method = sim_cmd->add_option("--method", flag_method, "estimator: mle or nlls");
    sim_cmd->add_option("--format", format_sim, "output format: csv, markdown, or json");
    sim_cmd->add_option("--output", output_sim, "write the table here instead of stdout");

    std::int64_t ecdf_n = 1000;
    std::uint64_t ecdf_seed = 42;
    CLI::App* ecdf_cmd = app.add_subcommand(
        "ecdf", "emit fitted-propensity ECDF plot data under a misspecified and a correct model");
    ecdf_cmd->add_option("--n", ecdf_n, "sample size");
    ecdf_cmd->add_option("--seed", ecdf_seed, "RNG seed");
    ecdf_cmd->add_option("--format", format_ecdf, "output format: csv or json");
    ecdf_cmd->add_option("--output", output_ecdf, "write the data here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return PSTEST_ERROR_INVALID_INPUT;
    }

    try {
        if (fit_cmd->parsed()) {
            data_cfg.intercept = !no_intercept_fit;
            return cmd_fit(data_cfg, format_fit, output_fit);
        }
        if (test_cmd->parsed()) {
            data_cfg.intercept = !no_intercept_test;
            return cmd_test(data_cfg, bootstrap, seed_test, alphas, kernel_c, format_test,
                            output_test);
        }
        if (sim_cmd->parsed()) {
            if (!config_path.empty()) load_config_file(config_path, sim);
            if (opt_dgps->count() > 0) sim.dgps = flag_dgps;
            if (opt_sizes->count() > 0) sim.sizes = flag_sizes;
            if (opt_reps->count() > 0) sim.replications = flag_reps;
            if (opt_boot->count() > 0) sim.bootstrap = flag_boot;
            if (opt_kc->count() > 0) sim.kernel_c = flag_kernel_c;
            if (opt_alpha->count() > 0) sim.alphas = flag_alphas;
            if (opt_seed->count() > 0) sim.seed = flag_seed;
            if (opt_method->count() > 0) sim.method = flag_method;
            return cmd_simulate(sim, format_sim, output_sim);
        }
        if (ecdf_cmd->parsed()) return cmd_ecdf(ecdf_n, ecdf_seed, format_ecdf, output_ecdf);
        die_input("no command given");
    } catch (const CliError& err) {
        std::cerr << "error: " << err.message << "\n";
        return err.code;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return PSTEST_ERROR_INTERNAL;
    }
    return 0;
}
