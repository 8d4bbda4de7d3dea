#include "rkm/cli/commands.hpp"

#include "rkm/cli/dataset_io.hpp"
#include "rkm/cli/svg.hpp"
#include "rkm/cluster.hpp"
#include "rkm/error.hpp"
#include "rkm/gram.hpp"
#include "rkm/kernels.hpp"
#include "rkm/linalg.hpp"
#include "rkm/parallel.hpp"
#include "rkm/structure.hpp"
#include "rkm/version.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace rkm::cli {
namespace {

namespace fs = std::filesystem;

// Seed-grid jobs run concurrently only while their matrices fit this budget.
constexpr double kMemoryBudgetBytes = 2.0 * 1024 * 1024 * 1024;

std::string num(double v, int precision = 10)
{
    if (!std::isfinite(v))
        return "";
    std::ostringstream s;
    s.precision(precision);
    s << v;
    return s.str();
}

std::string tag(double s)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", s);
    return buf;
}

fs::path prepare_dir(const std::string& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create output directory " + dir + ": " + ec.message());
    return fs::path(dir);
}

void run_grid(std::size_t jobs, double bytes_per_job, const std::function<void(std::size_t)>& body)
{
    const double concurrent = std::min<double>(thread_count(), static_cast<double>(jobs));
    if (bytes_per_job * concurrent > kMemoryBudgetBytes) {
        for (std::size_t i = 0; i < jobs; ++i)
            body(i);
        return;
    }
    parallel_for(0, jobs, body);
}

double dense_bytes(double n)
{
    return 8.0 * n * n;
}

double median(std::vector<double> v)
{
    if (v.empty())
        return std::nan("");
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

void cmd_sample(const ExperimentConfig& c, std::ostream& out)
{
    const auto dir = prepare_dir(c.output_dir);
    const auto m = build_model(*c.model);
    const auto mode = build_size_mode(*c.sampling, m);
    run_grid(c.seeds.size(), 0.0, [&](std::size_t i) {
        const auto seed = c.seeds[i];
        const auto data = model::sample(m, mode, seed);
        const std::string stem = "sample_seed" + std::to_string(seed);
        write_csv(data, (dir / (stem + ".csv")).string());
        write_binary(data, (dir / (stem + ".bin")).string());
    });
    out << "wrote " << c.seeds.size() << " dataset(s) to " << dir.string() << '\n';
}

void cmd_figure1(const ExperimentConfig& c, std::ostream& out)
{
    const auto dir = prepare_dir(c.output_dir);
    const auto& panels = *c.panels;
    const double t = c.kernel->t.value_or(0.1);
    const std::size_t jobs = panels.size() * c.seeds.size();
    std::vector<std::string> rows(jobs);
    std::vector<double> accuracy(jobs);

    for (std::size_t p = 0; p < panels.size(); ++p) {
        const auto& panel = panels[p];
        const auto n = static_cast<Eigen::Index>(panel.n);
        const auto m = model::figure1_model(n, panel.s);
        const auto per = static_cast<std::size_t>(panel.n);
        run_grid(c.seeds.size(), dense_bytes(2.0 * panel.n), [&](std::size_t si) {
            const auto seed = c.seeds[si];
            const auto data = model::sample(m, model::FixedPerComponent{{per, per}}, seed);
            const linalg::Vector v = cluster::second_singular_vector(data, t);
            const double acc = cluster::align_and_score(cluster::sign_labels(v), data.labels);

            const std::string stem = "figure1_n" + std::to_string(panel.n) + "_s" + tag(panel.s) + "_seed" +
                                     std::to_string(seed);
            std::ostringstream csv;
            csv.precision(17);
            csv << "index,value,label\n";
            std::vector<ScatterPoint> points;
            points.reserve(static_cast<std::size_t>(v.size()));
            for (Eigen::Index i = 0; i < v.size(); ++i) {
                const int label = data.labels[static_cast<std::size_t>(i)];
                csv << i << ',' << v[i] << ',' << label << '\n';
                points.push_back({static_cast<double>(i), v[i], label});
            }
            write_text_file((dir / (stem + ".csv")).string(), csv.str());
            ScatterStyle style;
            style.title = "second singular vector, n=" + std::to_string(panel.n) + ", s=" + tag(panel.s) +
                          ", t=" + tag(t) + ", seed " + std::to_string(seed);
            style.x_label = "sample index";
            style.y_label = "entry value";
            write_text_file((dir / (stem + ".svg")).string(), render_scatter(points, style));

            const std::size_t job = p * c.seeds.size() + si;
            accuracy[job] = acc;
            rows[job] = std::to_string(panel.n) + ',' + num(panel.s) + ',' + num(t) + ',' + std::to_string(seed) + ',' +
                        std::to_string(data.size()) + ',' + num(acc) + ',' +
                        (panel.s == 0.0 ? "warning: s=0 gives identical components, accuracy is chance" : "");
        });
        std::vector<double> acc(accuracy.begin() + static_cast<std::ptrdiff_t>(p * c.seeds.size()),
                                accuracy.begin() + static_cast<std::ptrdiff_t>((p + 1) * c.seeds.size()));
        const auto good = std::count_if(acc.begin(), acc.end(), [](double a) { return a >= 0.9; });
        out << "n=" << panel.n << " s=" << panel.s << ": median accuracy " << num(median(acc), 4) << ", " << good
            << "/" << acc.size() << " seeds >= 0.9\n";
    }

    std::string summary = "n,s,t,seed,N,accuracy,note\n";
    for (const auto& r : rows)
        summary += r + '\n';
    write_text_file((dir / "figure1_summary.csv").string(), summary);
}

void cmd_gap_scan(const ExperimentConfig& c, std::ostream& out)
{
    const auto dir = prepare_dir(c.output_dir);
    const auto& dims = *c.dims;
    const auto& s = *c.sampling;
    std::string csv = "n,seed,N,s1,s2,s3,s4,s5,ratio\n";

    for (std::int64_t n : dims) {
        const auto m = build_model(*c.model, n);
        const auto spec = build_kernel(*c.kernel, static_cast<Eigen::Index>(n));
        const std::size_t total = s.total ? static_cast<std::size_t>(*s.total)
                                          : static_cast<std::size_t>(s.size_factor.value_or(10)) * static_cast<std::size_t>(n);
        std::vector<std::string> rows(c.seeds.size());
        std::vector<double> ratios(c.seeds.size(), std::nan(""));
        std::vector<double> tops(c.seeds.size(), std::nan(""));
        run_grid(c.seeds.size(), dense_bytes(static_cast<double>(total)), [&](std::size_t si) {
            const auto seed = c.seeds[si];
            const auto data = model::sample(m, model::FixedTotal{total}, seed);
            const auto km = kernels::kernel_matrix(data, spec);
            const std::size_t count = std::min<std::size_t>(5, total);
            const linalg::Vector sv = linalg::top_singular_values(km.matrix, count);
            std::string row = std::to_string(n) + ',' + std::to_string(seed) + ',' + std::to_string(total);
            for (std::size_t i = 0; i < 5; ++i)
                row += ',' + (i < count ? num(sv[static_cast<Eigen::Index>(i)], 17) : std::string());
            if (count >= 2 && sv[0] > 0.0)
                ratios[si] = sv[1] / sv[0];
            tops[si] = sv[0];
            rows[si] = row + ',' + num(ratios[si], 17);
        });
        for (const auto& r : rows)
            csv += r + '\n';
        double mean_ratio = 0.0, mean_top = 0.0;
        for (std::size_t i = 0; i < ratios.size(); ++i) {
            mean_ratio += ratios[i] / static_cast<double>(ratios.size());
            mean_top += tops[i] / static_cast<double>(tops.size());
        }
        out << "n=" << n << " N=" << total << ": mean s1 " << num(mean_top, 6) << ", mean s2/s1 " << num(mean_ratio, 6)
            << '\n';
    }
    write_text_file((dir / "gap_scan.csv").string(), csv);
}

void cmd_kpca_cluster(const ExperimentConfig& c, std::ostream& out)
{
    const auto dir = prepare_dir(c.output_dir);
    const auto m = build_model(*c.model);
    const auto spec = build_kernel(*c.kernel, m.dim());
    const auto mode = build_size_mode(*c.sampling, m);
    const int k = c.cluster->k;
    std::vector<std::string> rows(c.seeds.size());
    std::vector<double> acc(c.seeds.size());
    parallel_for(0, c.seeds.size(), [&](std::size_t si) {
        const auto seed = c.seeds[si];
        const auto data = model::sample(m, mode, seed);
        const auto r = cluster::kernel_pca_cluster(data, spec, k, seed);
        auto diag = [&](const char* key) {
            const auto it = r.diagnostics.find(key);
            return it == r.diagnostics.end() ? std::string() : num(it->second);
        };
        acc[si] = r.accuracy;
        rows[si] = std::to_string(seed) + ',' + std::to_string(data.size()) + ',' + num(r.accuracy) + ',' +
                   diag("max_angle") + ',' + diag("eigen_gap") + ',' + diag("kmeans_cost");
    });
    std::string csv = "seed,N,accuracy,max_angle,eigen_gap,kmeans_cost\n";
    for (const auto& r : rows)
        csv += r + '\n';
    write_text_file((dir / "kpca_cluster.csv").string(), csv);
    out << "median accuracy " << num(median(acc), 4) << " over " << acc.size() << " seed(s)\n";
}

void cmd_cov_cluster(const ExperimentConfig& c, std::ostream& out)
{
    using Json = nlohmann::ordered_json;
    const auto dir = prepare_dir(c.output_dir);
    const auto m = build_model(*c.model);
    const auto mode = build_size_mode(*c.sampling, m);
    const auto& kc = *c.kernel;
    const auto& cc = *c.cluster;

    cluster::CovarianceClusterOptions base;
    base.k = cc.k;
    base.c1 = kc.c1.value_or(base.c1);
    base.c2 = kc.c2.value_or(base.c2);
    base.rule = parse_threshold_rule(kc.threshold_rule.value_or("fixed"));
    if (cc.delta == "model")
        base.model = m;
    else if (cc.delta == "value")
        base.delta_override = cc.delta_value;
    base.fast_path = cc.fast_path;
    base.restarts = cc.restarts;

    struct Row {
        std::uint64_t seed = 0;
        Eigen::Index size = 0;
        cluster::ClusteringResult result;
        double b_residual = std::nan("");
    };
    std::vector<Row> rows(c.seeds.size());
    parallel_for(0, c.seeds.size(), [&](std::size_t si) {
        Row& row = rows[si];
        row.seed = c.seeds[si];
        const auto data = model::sample(m, mode, row.seed);
        row.size = data.size();
        if (cc.radial) {
            row.result = cluster::radial_cluster(data, cc.k, row.seed);
            return;
        }
        auto options = base;
        options.seed = row.seed;
        row.result = cluster::covariance_cluster(data, options);
        const double t = row.result.diagnostics.at("t");
        const auto km = kernels::kernel_matrix(model::project_to_sphere(data), kernels::KernelSpec::h_t(t, data.dim()));
        row.b_residual = structure::residual_norm(km, structure::approximant_B(km));
    });

    auto diag = [](const cluster::ClusteringResult& r, const char* key) {
        const auto it = r.diagnostics.find(key);
        return it == r.diagnostics.end() ? std::nan("") : it->second;
    };
    std::string csv = "seed,N,accuracy,delta,t,threshold,surviving,b_residual\n";
    Json results = Json::array();
    std::vector<double> acc;
    for (const auto& row : rows) {
        const auto& r = row.result;
        acc.push_back(r.accuracy);
        csv += std::to_string(row.seed) + ',' + std::to_string(row.size) + ',' + num(r.accuracy) + ',' +
               num(diag(r, "delta")) + ',' + num(diag(r, "t")) + ',' + num(diag(r, "threshold")) + ',' +
               num(diag(r, "surviving")) + ',' + num(row.b_residual) + '\n';
        Json entry;
        entry["seed"] = row.seed;
        entry["N"] = row.size;
        entry["accuracy"] = r.accuracy;
        for (const auto& [key, value] : r.diagnostics)
            entry[key] = std::isfinite(value) ? Json(value) : Json(nullptr);
        if (std::isfinite(row.b_residual))
            entry["b_residual"] = row.b_residual;
        results.push_back(entry);
    }
    write_text_file((dir / "cov_cluster.csv").string(), csv);

    Json report;
    report["version"] = kVersion;
    report["config"] = Json::parse(to_json(c));
    report["seeds"] = c.seeds;
    report["method"] = cc.radial ? "radial" : "covariance";
    report["results"] = results;
    report["median_accuracy"] = median(acc);
    write_text_file((dir / "cov_cluster_report.json").string(), report.dump(2) + '\n');
    out << "median accuracy " << num(median(acc), 4) << " over " << acc.size() << " seed(s)\n";
}

void cmd_gram_check(const ExperimentConfig& c, std::ostream& out)
{
    const auto dir = prepare_dir(c.output_dir);
    const auto m = build_model(*c.model);
    const auto mode = build_size_mode(*c.sampling, m);
    const auto& kc = *c.kernel;
    const bool ht = kc.kind == "h_t";
    const double t = kc.t.value_or(0.1);
    const double tau = kc.tau.value_or(std::sqrt(static_cast<double>(m.dim())));
    const auto reference = ht ? gram::gram_ht_second_order(m, t) : gram::closed_form_gram(m, tau);
    const auto spec = ht ? kernels::KernelSpec::h_t(t, m.dim()) : kernels::KernelSpec::gaussian(tau);

    std::string csv = "seed,i,j,reference,empirical,abs_diff\n";
    std::string summary = "seed,N0,bound,max_abs_diff,det_reference,det_empirical\n";
    for (auto seed : c.seeds) {
        auto data = model::sample(m, mode, seed);
        if (ht)
            data = model::project_to_sphere(data);
        const auto km = kernels::kernel_matrix(data, spec);
        const auto emp = gram::empirical_gram(km);
        Eigen::Index n0 = data.size();
        for (const auto& [b, e] : km.block_bounds)
            n0 = std::min(n0, e - b);
        const double bound =
            (ht ? 5.0 * std::pow(t, 4) : 0.0) + 3.0 / std::sqrt(static_cast<double>(std::max<Eigen::Index>(n0, 1)));
        double worst = 0.0;
        const auto& R = reference.matrix.matrix();
        const auto& E = emp.matrix.matrix();
        for (Eigen::Index i = 0; i < R.rows(); ++i)
            for (Eigen::Index j = i; j < R.cols(); ++j) {
                const double d = std::abs(R(i, j) - E(i, j));
                worst = std::max(worst, d);
                csv += std::to_string(seed) + ',' + std::to_string(i) + ',' + std::to_string(j) + ',' + num(R(i, j), 17) +
                       ',' + num(E(i, j), 17) + ',' + num(d, 17) + '\n';
            }
        summary += std::to_string(seed) + ',' + std::to_string(n0) + ',' + num(bound) + ',' + num(worst) + ',' +
                   num(R.determinant()) + ',' + num(E.determinant()) + '\n';
        out << "seed " << seed << ": max |reference - empirical| " << num(worst, 4) << " (bound " << num(bound, 4)
            << "), det reference " << num(R.determinant(), 4) << ", det empirical " << num(E.determinant(), 4) << '\n';
    }
    write_text_file((dir / "gram_check.csv").string(), csv);
    write_text_file((dir / "gram_check_summary.csv").string(), summary);
}

void cmd_diag_ch(const ExperimentConfig& c, std::ostream& out)
{
    const auto dir = prepare_dir(c.output_dir);
    std::string csv = "n,kernel,R,c_h,c_h_spherical\n";
    for (std::int64_t n : *c.dims) {
        const auto dim = static_cast<Eigen::Index>(n);
        const auto spec = build_kernel(*c.kernel, dim);
        const double R = c.kernel->radius.value_or(std::sqrt(static_cast<double>(n)));
        const double plain = kernels::c_h_diagnostic(spec, R, false, dim);
        const double spherical = kernels::c_h_diagnostic(spec, R, true, dim);
        csv += std::to_string(n) + ",\"" + spec.describe() + "\"," + num(R) + ',' + num(plain) + ',' + num(spherical) + '\n';
        out << "n=" << n << " " << spec.describe() << ": c_h " << num(plain, 4) << ", spherical " << num(spherical, 4)
            << '\n';
    }
    write_text_file((dir / "diag_ch.csv").string(), csv);
}

} // namespace

ExperimentConfig resolve_config(const std::string& command, const GlobalOptions& opts)
{
    ExperimentConfig c = opts.config_path ? load_config(*opts.config_path) : default_config(command);
    if (c.experiment != command)
        throw ValidationError("config is for experiment '" + c.experiment + "' but the subcommand is '" + command + "'");
    if (opts.seed)
        c.seeds = {*opts.seed};
    if (opts.out)
        c.output_dir = *opts.out;
    const ExperimentConfig d = default_config(command);
    if (!c.model)
        c.model = d.model;
    if (!c.kernel)
        c.kernel = d.kernel;
    if (!c.sampling)
        c.sampling = d.sampling;
    if (!c.cluster)
        c.cluster = d.cluster;
    if (!c.panels)
        c.panels = d.panels;
    if (!c.dims)
        c.dims = d.dims;
    validate(c, opts.large);
    return c;
}

void execute(const ExperimentConfig& c, std::ostream& out)
{
    const std::string& e = c.experiment;
    if (e == "sample")
        cmd_sample(c, out);
    else if (e == "figure1")
        cmd_figure1(c, out);
    else if (e == "gap-scan")
        cmd_gap_scan(c, out);
    else if (e == "kpca-cluster")
        cmd_kpca_cluster(c, out);
    else if (e == "cov-cluster")
        cmd_cov_cluster(c, out);
    else if (e == "gram-check")
        cmd_gram_check(c, out);
    else if (e == "diag-ch")
        cmd_diag_ch(c, out);
    else
        throw ValidationError("unknown experiment '" + e + "'");
}

int run_command(const std::string& command, const GlobalOptions& opts, std::ostream& out, std::ostream& err)
{
    try {
        if (opts.threads > 0)
            set_thread_count(opts.threads);
        const auto config = resolve_config(command, opts);
        if (opts.dump_config) {
            out << to_json(config) << '\n';
            return 0;
        }
        execute(config, out);
        return 0;
    } catch (const DegenerateSeparationError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const ValidationError& e) {
        err << "invalid input: " << e.what() << '\n';
        return 2;
    } catch (const UnsupportedModelError& e) {
        err << "unsupported model: " << e.what() << '\n';
        return 2;
    } catch (const ConvergenceError& e) {
        err << "did not converge: " << e.what() << '\n';
        return 3;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace rkm::cli
