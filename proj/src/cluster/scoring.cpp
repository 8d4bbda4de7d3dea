#include "rkm/cluster.hpp"

#include "rkm/error.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace rkm::cluster {
namespace {

// Maps arbitrary label values onto 0..m-1 in increasing order.
std::vector<int> compact(const std::vector<int>& labels, int& distinct)
{
    std::map<int, int> ids;
    for (int l : labels)
        ids.emplace(l, 0);
    int next = 0;
    for (auto& [value, id] : ids)
        id = next++;
    distinct = next;
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        out[i] = ids[labels[i]];
    return out;
}

} // namespace

double align_and_score(const std::vector<int>& predicted, const std::vector<int>& truth)
{
    if (predicted.size() != truth.size())
        throw ValidationError("align_and_score: predicted and truth differ in length");
    if (truth.empty())
        throw ValidationError("align_and_score: empty label vectors");

    int kp = 0, kt = 0;
    const std::vector<int> p = compact(predicted, kp);
    const std::vector<int> t = compact(truth, kt);
    const int m = std::max(kp, kt);
    std::vector<std::vector<long>> table(static_cast<std::size_t>(m), std::vector<long>(static_cast<std::size_t>(m), 0));
    for (std::size_t i = 0; i < p.size(); ++i)
        ++table[static_cast<std::size_t>(p[i])][static_cast<std::size_t>(t[i])];

    long best = 0;
    if (m <= 6) {
        std::vector<int> perm(static_cast<std::size_t>(m));
        std::iota(perm.begin(), perm.end(), 0);
        do {
            long agree = 0;
            for (int i = 0; i < m; ++i)
                agree += table[static_cast<std::size_t>(i)][static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
            best = std::max(best, agree);
        } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
        // Greedy: repeatedly take the largest cell among unused rows and columns.
        std::vector<bool> row_used(static_cast<std::size_t>(m), false), col_used(static_cast<std::size_t>(m), false);
        for (int step = 0; step < m; ++step) {
            long cell = -1;
            int bi = 0, bj = 0;
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    if (!row_used[static_cast<std::size_t>(i)] && !col_used[static_cast<std::size_t>(j)] &&
                        table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] > cell) {
                        cell = table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                        bi = i;
                        bj = j;
                    }
            row_used[static_cast<std::size_t>(bi)] = true;
            col_used[static_cast<std::size_t>(bj)] = true;
            best += cell;
        }
    }
    return static_cast<double>(best) / static_cast<double>(truth.size());
}

std::vector<int> sign_labels(const Vector& v)
{
    std::vector<int> out(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out[static_cast<std::size_t>(i)] = v[i] >= 0.0 ? 0 : 1;
    return out;
}

} // namespace rkm::cluster
