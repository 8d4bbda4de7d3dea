#include "rkm/cli/config.hpp"

#include "rkm/error.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace rkm::cli {
namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& what)
{
    throw ValidationError("config: " + path + ": " + what);
}

template <class T>
T convert(const Json& v, const std::string& path);

template <>
double convert<double>(const Json& v, const std::string& path)
{
    if (!v.is_number())
        fail(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d))
        fail(path, "expected a finite number");
    return d;
}

template <>
std::int64_t convert<std::int64_t>(const Json& v, const std::string& path)
{
    if (!v.is_number_integer())
        fail(path, "expected an integer");
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
        fail(path, "integer out of range");
    return v.get<std::int64_t>();
}

template <>
int convert<int>(const Json& v, const std::string& path)
{
    const std::int64_t x = convert<std::int64_t>(v, path);
    if (x < INT32_MIN || x > INT32_MAX)
        fail(path, "integer out of range");
    return static_cast<int>(x);
}

template <>
std::uint64_t convert<std::uint64_t>(const Json& v, const std::string& path)
{
    if (!v.is_number_unsigned())
        fail(path, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

template <>
bool convert<bool>(const Json& v, const std::string& path)
{
    if (!v.is_boolean())
        fail(path, "expected true or false");
    return v.get<bool>();
}

template <>
std::string convert<std::string>(const Json& v, const std::string& path)
{
    if (!v.is_string())
        fail(path, "expected a string");
    return v.get<std::string>();
}

template <class T>
std::vector<T> convert_array(const Json& v, const std::string& path)
{
    if (!v.is_array())
        fail(path, "expected an array");
    std::vector<T> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(convert<T>(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

template <>
std::vector<double> convert<std::vector<double>>(const Json& v, const std::string& path)
{
    return convert_array<double>(v, path);
}
template <>
std::vector<std::int64_t> convert<std::vector<std::int64_t>>(const Json& v, const std::string& path)
{
    return convert_array<std::int64_t>(v, path);
}
template <>
std::vector<std::uint64_t> convert<std::vector<std::uint64_t>>(const Json& v, const std::string& path)
{
    return convert_array<std::uint64_t>(v, path);
}
template <>
std::vector<std::vector<double>> convert<std::vector<std::vector<double>>>(const Json& v, const std::string& path)
{
    return convert_array<std::vector<double>>(v, path);
}

// Reads the keys of one JSON object and rejects any it was not asked about.
class ObjectReader {
public:
    ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            fail(path_, "expected an object");
    }

    template <class T>
    std::optional<T> optional(const std::string& key)
    {
        known_.insert(key);
        if (!j_.contains(key))
            return std::nullopt;
        return convert<T>(j_.at(key), child(key));
    }

    template <class T>
    T required(const std::string& key)
    {
        auto v = optional<T>(key);
        if (!v)
            fail(child(key), "missing required key");
        return *v;
    }

    const Json* object(const std::string& key)
    {
        known_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!known_.count(it.key()))
                fail(child(it.key()), "unknown key");
    }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string> known_;
};

template <>
ComponentConfig convert<ComponentConfig>(const Json& v, const std::string& path)
{
    ObjectReader r(v, path);
    ComponentConfig c;
    c.weight = r.required<double>("weight");
    c.mean = r.required<std::vector<double>>("mean");
    if (const Json* cov = r.object("covariance")) {
        ObjectReader cr(*cov, r.child("covariance"));
        c.isotropic = cr.optional<double>("isotropic");
        c.diagonal = cr.optional<std::vector<double>>("diagonal");
        c.full = cr.optional<std::vector<std::vector<double>>>("full");
        cr.finish();
        const int set = int(c.isotropic.has_value()) + int(c.diagonal.has_value()) + int(c.full.has_value());
        if (set != 1)
            fail(r.child("covariance"), "exactly one of isotropic, diagonal, full is required");
    } else {
        fail(r.child("covariance"), "missing required key");
    }
    r.finish();
    return c;
}
template <>
std::vector<ComponentConfig> convert<std::vector<ComponentConfig>>(const Json& v, const std::string& path)
{
    return convert_array<ComponentConfig>(v, path);
}

template <>
Panel convert<Panel>(const Json& v, const std::string& path)
{
    ObjectReader r(v, path);
    Panel p;
    p.n = r.required<std::int64_t>("n");
    p.s = r.required<double>("s");
    r.finish();
    return p;
}
template <>
std::vector<Panel> convert<std::vector<Panel>>(const Json& v, const std::string& path)
{
    return convert_array<Panel>(v, path);
}

ModelConfig read_model(const Json& j)
{
    ObjectReader r(j, "model");
    ModelConfig m;
    m.kind = r.optional<std::string>("kind").value_or(m.kind);
    m.n = r.optional<std::int64_t>("n");
    m.s = r.optional<double>("s");
    m.separation = r.optional<double>("separation");
    m.variances = r.optional<std::vector<double>>("variances");
    m.components = r.optional<std::vector<ComponentConfig>>("components");
    r.finish();
    return m;
}

KernelConfig read_kernel(const Json& j)
{
    ObjectReader r(j, "kernel");
    KernelConfig k;
    k.kind = r.optional<std::string>("kind").value_or(k.kind);
    k.tau = r.optional<double>("tau");
    k.r0 = r.optional<double>("r0");
    k.t = r.optional<double>("t");
    k.c1 = r.optional<double>("c1");
    k.c2 = r.optional<double>("c2");
    k.threshold_rule = r.optional<std::string>("threshold_rule");
    k.radius = r.optional<double>("radius");
    k.spherical = r.optional<bool>("spherical");
    r.finish();
    return k;
}

SamplingConfig read_sampling(const Json& j)
{
    ObjectReader r(j, "sampling");
    SamplingConfig s;
    s.mode = r.optional<std::string>("mode").value_or(s.mode);
    s.total = r.optional<std::uint64_t>("total");
    s.per_component = r.optional<std::vector<std::uint64_t>>("per_component");
    s.mean = r.optional<double>("mean");
    s.size_factor = r.optional<std::uint64_t>("size_factor");
    r.finish();
    return s;
}

ClusterConfig read_cluster(const Json& j)
{
    ObjectReader r(j, "cluster");
    ClusterConfig c;
    c.k = r.optional<int>("k").value_or(c.k);
    c.restarts = r.optional<int>("restarts").value_or(c.restarts);
    c.fast_path = r.optional<bool>("fast_path").value_or(c.fast_path);
    c.radial = r.optional<bool>("radial").value_or(c.radial);
    c.delta = r.optional<std::string>("delta").value_or(c.delta);
    c.delta_value = r.optional<double>("delta_value");
    r.finish();
    return c;
}

template <class T>
void put(Json& j, const char* key, const std::optional<T>& v)
{
    if (v)
        j[key] = *v;
}

Json write_component(const ComponentConfig& c)
{
    Json j;
    j["weight"] = c.weight;
    j["mean"] = c.mean;
    Json cov = Json::object();
    put(cov, "isotropic", c.isotropic);
    put(cov, "diagonal", c.diagonal);
    put(cov, "full", c.full);
    j["covariance"] = cov;
    return j;
}

const std::set<std::string> kExperiments = {"sample", "figure1", "gap-scan", "kpca-cluster", "cov-cluster", "gram-check", "diag-ch"};

std::vector<std::uint64_t> seed_range(std::uint64_t count)
{
    std::vector<std::uint64_t> s;
    for (std::uint64_t i = 1; i <= count; ++i)
        s.push_back(i);
    return s;
}

} // namespace

ExperimentConfig parse_config(const std::string& text)
{
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("config: malformed JSON: ") + e.what());
    }
    ObjectReader r(j, "");
    ExperimentConfig c;
    c.experiment = r.required<std::string>("experiment");
    if (const Json* m = r.object("model"))
        c.model = read_model(*m);
    if (const Json* k = r.object("kernel"))
        c.kernel = read_kernel(*k);
    if (const Json* s = r.object("sampling"))
        c.sampling = read_sampling(*s);
    if (const Json* cl = r.object("cluster"))
        c.cluster = read_cluster(*cl);
    c.panels = r.optional<std::vector<Panel>>("panels");
    c.dims = r.optional<std::vector<std::int64_t>>("dims");
    c.seeds = r.optional<std::vector<std::uint64_t>>("seeds").value_or(std::vector<std::uint64_t>{});
    c.output_dir = r.optional<std::string>("output_dir").value_or(c.output_dir);
    r.finish();
    return c;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string to_json(const ExperimentConfig& c)
{
    Json j;
    j["experiment"] = c.experiment;
    if (c.model) {
        Json m;
        m["kind"] = c.model->kind;
        put(m, "n", c.model->n);
        put(m, "s", c.model->s);
        put(m, "separation", c.model->separation);
        put(m, "variances", c.model->variances);
        if (c.model->components) {
            Json list = Json::array();
            for (const auto& comp : *c.model->components)
                list.push_back(write_component(comp));
            m["components"] = list;
        }
        j["model"] = m;
    }
    if (c.kernel) {
        Json k;
        k["kind"] = c.kernel->kind;
        put(k, "tau", c.kernel->tau);
        put(k, "r0", c.kernel->r0);
        put(k, "t", c.kernel->t);
        put(k, "c1", c.kernel->c1);
        put(k, "c2", c.kernel->c2);
        put(k, "threshold_rule", c.kernel->threshold_rule);
        put(k, "radius", c.kernel->radius);
        put(k, "spherical", c.kernel->spherical);
        j["kernel"] = k;
    }
    if (c.sampling) {
        Json s;
        s["mode"] = c.sampling->mode;
        put(s, "total", c.sampling->total);
        put(s, "per_component", c.sampling->per_component);
        put(s, "mean", c.sampling->mean);
        put(s, "size_factor", c.sampling->size_factor);
        j["sampling"] = s;
    }
    if (c.cluster) {
        Json cl;
        cl["k"] = c.cluster->k;
        cl["restarts"] = c.cluster->restarts;
        cl["fast_path"] = c.cluster->fast_path;
        cl["radial"] = c.cluster->radial;
        cl["delta"] = c.cluster->delta;
        put(cl, "delta_value", c.cluster->delta_value);
        j["cluster"] = cl;
    }
    if (c.panels) {
        Json list = Json::array();
        for (const auto& p : *c.panels)
            list.push_back(Json{{"n", p.n}, {"s", p.s}});
        j["panels"] = list;
    }
    put(j, "dims", c.dims);
    j["seeds"] = c.seeds;
    j["output_dir"] = c.output_dir;
    return j.dump(2);
}

ExperimentConfig default_config(const std::string& experiment)
{
    ExperimentConfig c;
    c.experiment = experiment;
    c.output_dir = "out";
    if (experiment == "sample") {
        c.model = ModelConfig{"figure1", 4, 0.5, {}, {}, {}};
        c.sampling = SamplingConfig{"per_component", {}, std::vector<std::uint64_t>{2, 2}, {}, {}};
        c.seeds = {7};
    } else if (experiment == "figure1") {
        KernelConfig k;
        k.kind = "h_t";
        k.t = 0.1;
        c.kernel = k;
        c.panels = std::vector<Panel>{{10, 0.9}, {100, 0.6}, {1000, 0.33}};
        c.seeds = seed_range(10);
    } else if (experiment == "gap-scan") {
        c.model = ModelConfig{"single_gaussian", {}, {}, {}, {}, {}};
        KernelConfig k;
        k.kind = "distance";
        c.kernel = k;
        SamplingConfig s;
        s.mode = "fixed";
        s.size_factor = 10;
        c.sampling = s;
        c.dims = std::vector<std::int64_t>{50, 200, 800};
        c.seeds = seed_range(5);
    } else if (experiment == "kpca-cluster") {
        c.model = ModelConfig{"two_gaussians", 200, {}, 10.0, {}, {}};
        c.kernel = KernelConfig{};
        c.sampling = SamplingConfig{"per_component", {}, std::vector<std::uint64_t>{200, 200}, {}, {}};
        c.cluster = ClusterConfig{};
        c.seeds = seed_range(10);
    } else if (experiment == "cov-cluster") {
        c.model = ModelConfig{"figure1", 100, 0.6, {}, {}, {}};
        KernelConfig k;
        k.kind = "h_t";
        k.c1 = 1.0 / 12.0;
        k.c2 = 1e-3;
        k.threshold_rule = "fixed";
        c.kernel = k;
        c.sampling = SamplingConfig{"per_component", {}, std::vector<std::uint64_t>{100, 100}, {}, {}};
        c.cluster = ClusterConfig{};
        c.seeds = seed_range(10);
    } else if (experiment == "gram-check") {
        c.model = ModelConfig{"figure1", 100, 0.6, {}, {}, {}};
        KernelConfig k;
        k.kind = "h_t";
        k.t = 0.1;
        c.kernel = k;
        c.sampling = SamplingConfig{"per_component", {}, std::vector<std::uint64_t>{2000, 2000}, {}, {}};
        c.seeds = {1};
    } else if (experiment == "diag-ch") {
        c.kernel = KernelConfig{};
        c.dims = std::vector<std::int64_t>{16, 64, 256};
        c.seeds = {1};
    } else {
        throw ValidationError("unknown experiment '" + experiment + "'");
    }
    return c;
}

model::MixtureModel build_model(const ModelConfig& m, std::optional<std::int64_t> n_override)
{
    const std::optional<std::int64_t> n = n_override ? n_override : m.n;
    auto need_n = [&]() -> Eigen::Index {
        if (!n)
            fail("model.n", "required for kind " + m.kind);
        if (*n < 1)
            fail("model.n", "must be >= 1");
        return static_cast<Eigen::Index>(*n);
    };
    if (m.kind == "figure1") {
        if (!m.s)
            fail("model.s", "required for kind figure1");
        return model::figure1_model(need_n(), *m.s);
    }
    if (m.kind == "two_gaussians") {
        if (!m.separation)
            fail("model.separation", "required for kind two_gaussians");
        return model::two_gaussians(need_n(), *m.separation);
    }
    if (m.kind == "isotropic_scales") {
        if (!m.variances)
            fail("model.variances", "required for kind isotropic_scales");
        return model::isotropic_scales(need_n(), *m.variances);
    }
    if (m.kind == "single_gaussian") {
        const Eigen::Index dim = need_n();
        return model::MixtureModel(dim, {model::GaussianComponent{1.0, linalg::Vector::Zero(dim), model::Isotropic{1.0}}});
    }
    if (m.kind == "custom") {
        if (!m.components || m.components->empty())
            fail("model.components", "required for kind custom");
        const auto dim = static_cast<Eigen::Index>(m.components->front().mean.size());
        if (n && *n != dim)
            fail("model.n", "does not match the component mean length");
        std::vector<model::GaussianComponent> comps;
        for (std::size_t i = 0; i < m.components->size(); ++i) {
            const auto& cc = (*m.components)[i];
            model::GaussianComponent g;
            g.weight = cc.weight;
            g.mean = Eigen::Map<const linalg::Vector>(cc.mean.data(), static_cast<Eigen::Index>(cc.mean.size()));
            if (cc.isotropic) {
                g.covariance = model::Isotropic{*cc.isotropic};
            } else if (cc.diagonal) {
                g.covariance = model::Diagonal{Eigen::Map<const linalg::Vector>(cc.diagonal->data(), static_cast<Eigen::Index>(cc.diagonal->size()))};
            } else {
                const auto& rows = *cc.full;
                linalg::Matrix f(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
                for (std::size_t r = 0; r < rows.size(); ++r) {
                    if (rows[r].size() != rows.size())
                        fail("model.components[" + std::to_string(i) + "].covariance.full", "must be square");
                    for (std::size_t col = 0; col < rows.size(); ++col)
                        f(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col)) = rows[r][col];
                }
                g.covariance = model::Full{f};
            }
            comps.push_back(std::move(g));
        }
        return model::MixtureModel(dim, std::move(comps));
    }
    fail("model.kind", "unknown kind '" + m.kind + "'");
}

kernels::KernelSpec build_kernel(const KernelConfig& k, Eigen::Index n)
{
    const double root_n = std::sqrt(static_cast<double>(n));
    if (k.kind == "gaussian")
        return kernels::KernelSpec::gaussian(k.tau.value_or(root_n));
    if (k.kind == "distance")
        return kernels::KernelSpec::distance();
    if (k.kind == "smoothed_distance")
        return kernels::KernelSpec::smoothed_distance(k.r0.value_or(root_n));
    if (k.kind == "h_t")
        return kernels::KernelSpec::h_t(k.t.value_or(0.1), n);
    fail("kernel.kind", "unknown kind '" + k.kind + "'");
}

model::SizeMode build_size_mode(const SamplingConfig& s, const model::MixtureModel& m)
{
    if (s.mode == "fixed") {
        if (!s.total)
            fail("sampling.total", "required for mode fixed");
        return model::FixedTotal{static_cast<std::size_t>(*s.total)};
    }
    if (s.mode == "per_component") {
        if (!s.per_component)
            fail("sampling.per_component", "required for mode per_component");
        if (s.per_component->size() != m.size())
            fail("sampling.per_component", "needs one count per component");
        std::vector<std::size_t> counts(s.per_component->begin(), s.per_component->end());
        return model::FixedPerComponent{counts};
    }
    if (s.mode == "poisson") {
        if (!s.mean)
            fail("sampling.mean", "required for mode poisson");
        return model::PoissonTotal{*s.mean};
    }
    fail("sampling.mode", "unknown mode '" + s.mode + "'");
}

cluster::ThresholdRule parse_threshold_rule(const std::string& name)
{
    if (name == "fixed")
        return cluster::ThresholdRule::fixed;
    if (name == "spectral_gap")
        return cluster::ThresholdRule::spectral_gap;
    if (name == "bulk_median")
        return cluster::ThresholdRule::bulk_median;
    fail("kernel.threshold_rule", "unknown rule '" + name + "'");
}

void validate(const ExperimentConfig& c, bool allow_large)
{
    if (!kExperiments.count(c.experiment))
        fail("experiment", "unknown experiment '" + c.experiment + "'");
    if (c.seeds.empty())
        fail("seeds", "at least one seed is required");
    if (c.output_dir.empty())
        fail("output_dir", "must not be empty");
    const ExperimentConfig d = default_config(c.experiment);
    const ModelConfig model = c.model.value_or(d.model.value_or(ModelConfig{}));
    const KernelConfig kernel = c.kernel.value_or(d.kernel.value_or(KernelConfig{}));
    const ClusterConfig cl = c.cluster.value_or(d.cluster.value_or(ClusterConfig{}));

    if (c.experiment == "figure1") {
        const auto panels = c.panels.value_or(*d.panels);
        if (panels.empty())
            fail("panels", "at least one panel is required");
        for (const auto& p : panels) {
            model::figure1_model(static_cast<Eigen::Index>(p.n), p.s);
            if (p.n > 2000 && !allow_large)
                fail("panels", "n=" + std::to_string(p.n) + " needs a dense " + std::to_string(2 * p.n) +
                                   "-square matrix; pass --large to run it");
            build_kernel(kernel, static_cast<Eigen::Index>(p.n));
        }
        if (kernel.kind != "h_t")
            fail("kernel.kind", "figure1 uses the h_t kernel");
        return;
    }
    if (c.experiment == "gap-scan" || c.experiment == "diag-ch") {
        const auto dims = c.dims.value_or(*d.dims);
        if (dims.empty())
            fail("dims", "at least one dimension is required");
        for (std::int64_t n : dims) {
            if (n < 1)
                fail("dims", "dimensions must be >= 1");
            const auto spec = build_kernel(kernel, static_cast<Eigen::Index>(n));
            if (c.experiment == "gap-scan") {
                const auto m = build_model(model, n);
                const SamplingConfig s = c.sampling.value_or(*d.sampling);
                if (s.mode != "fixed")
                    fail("sampling.mode", "gap-scan draws a fixed total");
                if (!s.total && s.size_factor.value_or(10) < 1)
                    fail("sampling.size_factor", "must be >= 1");
                if (s.total && *s.total < 1)
                    fail("sampling.total", "must be >= 1");
                (void)m;
            } else {
                if (kernel.radius && !(*kernel.radius > 0.0))
                    fail("kernel.radius", "must be positive");
                (void)spec;
            }
        }
        return;
    }
    if (c.experiment == "diag-ch")
        return;

    const auto m = build_model(model);
    const Eigen::Index n = m.dim();
    const auto spec = c.experiment == "cov-cluster" ? kernels::KernelSpec::h_t(1.0, n) : build_kernel(kernel, n);
    build_size_mode(c.sampling.value_or(*d.sampling), m);

    if (c.experiment == "kpca-cluster") {
        if (!spec.positive_definite())
            fail("kernel.kind", "kernel PCA needs the gaussian kernel");
        if (cl.k < 1)
            fail("cluster.k", "must be >= 1");
    }
    if (c.experiment == "cov-cluster") {
        if (kernel.kind != "h_t")
            fail("kernel.kind", "cov-cluster uses the h_t kernel");
        if (!(kernel.c1.value_or(1.0) > 0.0) || !(kernel.c2.value_or(1.0) > 0.0))
            fail("kernel", "c1 and c2 must be positive");
        parse_threshold_rule(kernel.threshold_rule.value_or("fixed"));
        if (cl.k < 2)
            fail("cluster.k", "must be >= 2");
        if (cl.delta != "model" && cl.delta != "plug_in" && cl.delta != "value")
            fail("cluster.delta", "must be model, plug_in or value");
        if (cl.delta == "value" && !cl.delta_value)
            fail("cluster.delta_value", "required when cluster.delta is value");
    }
    if (c.experiment == "gram-check" && kernel.kind != "gaussian" && kernel.kind != "h_t")
        fail("kernel.kind", "gram-check supports the gaussian and h_t kernels");
    if (c.experiment == "kpca-cluster" || c.experiment == "cov-cluster")
        if (cl.restarts < 1)
            fail("cluster.restarts", "must be >= 1");
}

} // namespace rkm::cli
