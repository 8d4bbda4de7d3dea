#include "rkm/cluster.hpp"

#include "rkm/error.hpp"
#include "rkm/parallel.hpp"
#include "rkm/rng.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rkm::cluster {
namespace {

constexpr std::uint64_t kRestartStreamBase = 0x6b6d0000;
constexpr int kMaxLloydSteps = 500;

struct Run {
    Matrix centers;
    std::vector<int> labels;
    std::vector<double> trace;
    double cost = 0.0;
};

// Squared distance of every point to its nearest center, ties to the lower
// center index. Returns the total.
double assign(const Matrix& points, const Matrix& centers, std::vector<int>& labels, Vector& dist)
{
    const Eigen::Index count = points.cols();
    double total = 0.0;
    for (Eigen::Index x = 0; x < count; ++x) {
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (Eigen::Index c = 0; c < centers.cols(); ++c) {
            const double d = (points.col(x) - centers.col(c)).squaredNorm();
            if (d < best) {
                best = d;
                arg = static_cast<int>(c);
            }
        }
        labels[static_cast<std::size_t>(x)] = arg;
        dist[x] = best;
        total += best;
    }
    return total;
}

Matrix seed_plus_plus(const Matrix& points, int k, CounterRng& rng)
{
    const Eigen::Index count = points.cols();
    Matrix centers(points.rows(), k);
    std::vector<bool> chosen(static_cast<std::size_t>(count), false);

    auto first = static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(count));
    first = std::min(first, count - 1);
    centers.col(0) = points.col(first);
    chosen[static_cast<std::size_t>(first)] = true;

    Vector d2(count);
    for (Eigen::Index x = 0; x < count; ++x)
        d2[x] = (points.col(x) - centers.col(0)).squaredNorm();

    for (int c = 1; c < k; ++c) {
        const double total = d2.sum();
        Eigen::Index pick = -1;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            for (Eigen::Index x = 0; x < count; ++x) {
                acc += d2[x];
                if (acc > target && d2[x] > 0.0) {
                    pick = x;
                    break;
                }
            }
            if (pick < 0)
                for (Eigen::Index x = count - 1; x >= 0 && pick < 0; --x)
                    if (d2[x] > 0.0)
                        pick = x;
        } else {
            // Every point coincides with a center already; take any unused one.
            for (Eigen::Index x = 0; x < count && pick < 0; ++x)
                if (!chosen[static_cast<std::size_t>(x)])
                    pick = x;
        }
        centers.col(c) = points.col(pick);
        chosen[static_cast<std::size_t>(pick)] = true;
        for (Eigen::Index x = 0; x < count; ++x)
            d2[x] = std::min(d2[x], (points.col(x) - centers.col(c)).squaredNorm());
    }
    return centers;
}

Run lloyd(const Matrix& points, int k, CounterRng& rng)
{
    const Eigen::Index count = points.cols();
    Run run;
    run.centers = seed_plus_plus(points, k, rng);
    run.labels.assign(static_cast<std::size_t>(count), -1);
    Vector dist(count);
    std::vector<int> previous;

    for (int step = 0; step < kMaxLloydSteps; ++step) {
        previous = run.labels;
        const double cost = assign(points, run.centers, run.labels, dist);
        if (!run.trace.empty() && cost > run.trace.back() * (1.0 + 1e-12) + 1e-300) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "kmeans: cost rose from " << run.trace.back() << " to " << cost << " at step " << step;
            throw std::logic_error(msg.str());
        }
        run.trace.push_back(cost);
        run.cost = cost;
        if (run.labels == previous)
            break;

        Matrix sums = Matrix::Zero(points.rows(), k);
        std::vector<Eigen::Index> sizes(static_cast<std::size_t>(k), 0);
        for (Eigen::Index x = 0; x < count; ++x) {
            const int l = run.labels[static_cast<std::size_t>(x)];
            sums.col(l) += points.col(x);
            ++sizes[static_cast<std::size_t>(l)];
        }
        for (int c = 0; c < k; ++c) {
            if (sizes[static_cast<std::size_t>(c)] > 0) {
                run.centers.col(c) = sums.col(c) / static_cast<double>(sizes[static_cast<std::size_t>(c)]);
                continue;
            }
            // Empty cluster: move its center onto the worst-served point, which
            // then costs nothing. Nothing to do if every point sits on a center.
            Eigen::Index far = 0;
            const double worst = dist.maxCoeff(&far);
            if (worst > 0.0) {
                run.centers.col(c) = points.col(far);
                dist[far] = 0.0;
            }
        }
    }
    return run;
}

} // namespace

KMeansResult kmeans(const Matrix& points, int k, int restarts, std::uint64_t seed)
{
    const Eigen::Index count = points.cols();
    if (count < 1)
        throw ValidationError("kmeans: no points");
    if (k < 1 || k > count) {
        std::ostringstream msg;
        msg << "kmeans: k=" << k << " must lie in [1, " << count << "]";
        throw ValidationError(msg.str());
    }
    if (restarts < 1)
        throw ValidationError("kmeans: restarts must be >= 1");
    if (!points.allFinite())
        throw ValidationError("kmeans: non-finite coordinate");

    std::vector<Run> runs(static_cast<std::size_t>(restarts));
    parallel_for(0, runs.size(), [&](std::size_t r) {
        CounterRng rng(seed, kRestartStreamBase + r);
        runs[r] = lloyd(points, k, rng);
    });

    std::size_t best = 0;
    for (std::size_t r = 1; r < runs.size(); ++r)
        if (runs[r].cost < runs[best].cost)
            best = r;

    KMeansResult out;
    out.centers = runs[best].centers;
    out.labels = runs[best].labels;
    out.cost = runs[best].cost;
    out.best_restart = static_cast<int>(best);
    for (auto& r : runs)
        out.cost_traces.push_back(std::move(r.trace));
    return out;
}

} // namespace rkm::cluster
