#include "pucl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "pucl/errors.hpp"
#include "pucl/rng.hpp"

namespace pucl {

namespace {

constexpr double kProbeLambda = 1e-4;
constexpr double kProbeLr = 1.0;
constexpr int kProbeMaxIter = 5000;
constexpr double kProbeGradTol = 1e-6;

int distinct_classes(const std::vector<int>& class_ids, const std::vector<int>& subset) {
    std::vector<int> seen;
    for (int i : subset)
        if (std::find(seen.begin(), seen.end(), class_ids[i]) == seen.end())
            seen.push_back(class_ids[i]);
    return static_cast<int>(seen.size());
}

// Jacobi eigendecomposition of a symmetric matrix; eigenvectors land in the
// columns of v. Plenty at the d <= a few dozen sizes used here.
void symmetric_eigen(Matrix a, std::vector<double>& eigenvalues, Matrix& v) {
    std::size_t d = a.rows;
    v = Matrix(d, d);
    for (std::size_t i = 0; i < d; ++i) v(i, i) = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = p + 1; q < d; ++q) off += a(p, q) * a(p, q);
        if (off <= 1e-28) break;
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = p + 1; q < d; ++q) {
                double apq = a(p, q);
                if (std::abs(apq) < 1e-300) continue;
                double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = t * c;
                for (std::size_t k = 0; k < d; ++k) {
                    double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
    }
    eigenvalues.resize(d);
    for (std::size_t i = 0; i < d; ++i) eigenvalues[i] = a(i, i);
}

}  // namespace

ProbeResult linear_probe(const std::vector<UnitEmbedding>& embeddings,
                         const std::vector<int>& labels, double split_fraction,
                         std::uint64_t seed) {
    require(embeddings.size() == labels.size(), "probe: embeddings/labels size mismatch");
    require(embeddings.size() >= 4, "probe: too few samples");
    require(split_fraction > 0.0 && split_fraction < 1.0,
            "probe: split fraction must be in (0,1)");
    std::size_t n = embeddings.size();
    std::size_t d = embeddings[0].dim();
    for (const auto& e : embeddings)
        require(e.dim() == d, "probe: inconsistent embedding dimensions");

    // Contiguous class ids in sorted-label order.
    std::vector<int> sorted_labels = labels;
    std::sort(sorted_labels.begin(), sorted_labels.end());
    sorted_labels.erase(std::unique(sorted_labels.begin(), sorted_labels.end()),
                        sorted_labels.end());
    std::size_t k = sorted_labels.size();
    require(k >= 2, "probe: need at least 2 classes");
    std::map<int, int> id_of;
    for (std::size_t i = 0; i < k; ++i) id_of[sorted_labels[i]] = static_cast<int>(i);
    std::vector<int> class_ids(n);
    for (std::size_t i = 0; i < n; ++i) class_ids[i] = id_of[labels[i]];

    // Stratified split: per class, shuffled, first ~split_fraction to train.
    Rng root(seed);
    std::vector<int> train_idx, test_idx;
    for (std::size_t cls = 0; cls < k; ++cls) {
        std::vector<int> members;
        for (std::size_t i = 0; i < n; ++i)
            if (class_ids[i] == static_cast<int>(cls)) members.push_back(static_cast<int>(i));
        Rng r = root.split("probe-split", cls);
        r.shuffle(members);
        std::size_t n_c = members.size();
        std::size_t n_train = n_c;
        if (n_c >= 2) {
            n_train = static_cast<std::size_t>(std::llround(split_fraction * n_c));
            n_train = std::clamp<std::size_t>(n_train, 1, n_c - 1);
        }
        for (std::size_t i = 0; i < n_c; ++i)
            (i < n_train ? train_idx : test_idx).push_back(members[i]);
    }
    require(distinct_classes(class_ids, train_idx) >= 2, "probe: single-class train split");
    require(distinct_classes(class_ids, test_idx) >= 2, "probe: single-class test split");

    // Full-batch GD on the softmax cross-entropy with L2 on the weights.
    Matrix w(k, d);
    Vec b(k, 0.0);
    int iterations = 0;
    double inv_n = 1.0 / static_cast<double>(train_idx.size());
    std::vector<double> logits(k), probs(k);
    for (; iterations < kProbeMaxIter; ++iterations) {
        Matrix gw(k, d);
        Vec gb(k, 0.0);
        for (int i : train_idx) {
            const Vec& x = embeddings[i].values();
            double mx = -1e300;
            for (std::size_t cc = 0; cc < k; ++cc) {
                double z = b[cc];
                const double* row = &w.a[cc * d];
                for (std::size_t j = 0; j < d; ++j) z += row[j] * x[j];
                logits[cc] = z;
                if (z > mx) mx = z;
            }
            double zsum = 0.0;
            for (std::size_t cc = 0; cc < k; ++cc) {
                probs[cc] = std::exp(logits[cc] - mx);
                zsum += probs[cc];
            }
            for (std::size_t cc = 0; cc < k; ++cc) {
                double diff = probs[cc] / zsum - (static_cast<int>(cc) == class_ids[i]);
                gb[cc] += diff;
                double* row = &gw.a[cc * d];
                for (std::size_t j = 0; j < d; ++j) row[j] += diff * x[j];
            }
        }
        double gnorm2 = 0.0;
        for (std::size_t t = 0; t < gw.a.size(); ++t) {
            gw.a[t] = gw.a[t] * inv_n + kProbeLambda * w.a[t];
            gnorm2 += gw.a[t] * gw.a[t];
        }
        for (std::size_t cc = 0; cc < k; ++cc) {
            gb[cc] *= inv_n;
            gnorm2 += gb[cc] * gb[cc];
        }
        if (std::sqrt(gnorm2) < kProbeGradTol) break;
        for (std::size_t t = 0; t < w.a.size(); ++t) w.a[t] -= kProbeLr * gw.a[t];
        for (std::size_t cc = 0; cc < k; ++cc) b[cc] -= kProbeLr * gb[cc];
    }

    ProbeResult res;
    res.class_labels = sorted_labels;
    res.split_seed = seed;
    res.iterations = iterations;
    std::vector<int> correct(k, 0), count(k, 0);
    for (int i : test_idx) {
        const Vec& x = embeddings[i].values();
        int best = 0;
        double best_z = -1e300;
        for (std::size_t cc = 0; cc < k; ++cc) {
            double z = b[cc];
            const double* row = &w.a[cc * d];
            for (std::size_t j = 0; j < d; ++j) z += row[j] * x[j];
            if (z > best_z) {
                best_z = z;
                best = static_cast<int>(cc);
            }
        }
        ++count[class_ids[i]];
        if (best == class_ids[i]) ++correct[class_ids[i]];
    }
    int total_correct = 0, total = 0;
    res.per_class_accuracy.resize(k, 0.0);
    for (std::size_t cc = 0; cc < k; ++cc) {
        if (count[cc] > 0)
            res.per_class_accuracy[cc] =
                static_cast<double>(correct[cc]) / static_cast<double>(count[cc]);
        total_correct += correct[cc];
        total += count[cc];
    }
    res.accuracy = static_cast<double>(total_correct) / static_cast<double>(total);
    return res;
}

std::vector<std::array<double, 2>> project_2d(const std::vector<UnitEmbedding>& embeddings) {
    require(embeddings.size() >= 2, "project_2d: need at least 2 embeddings");
    std::size_t n = embeddings.size();
    std::size_t d = embeddings[0].dim();
    for (const auto& e : embeddings)
        require(e.dim() == d, "project_2d: inconsistent embedding dimensions");

    bool any_distinct = false;
    for (std::size_t i = 1; i < n && !any_distinct; ++i)
        any_distinct = embeddings[i].values() != embeddings[0].values();
    require(any_distinct, "project_2d: all embeddings identical");

    Vec mean(d, 0.0);
    for (const auto& e : embeddings) axpy(1.0, e.values(), mean);
    for (double& m : mean) m /= static_cast<double>(n);

    Matrix cov(d, d);
    for (const auto& e : embeddings) {
        Vec cvec = e.values();
        axpy(-1.0, mean, cvec);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) cov(i, j) += cvec[i] * cvec[j];
    }
    for (double& v : cov.a) v /= static_cast<double>(n);

    std::vector<double> eigenvalues;
    Matrix vecs;
    symmetric_eigen(cov, eigenvalues, vecs);

    // Top-2 components, ties broken by lower index for determinism.
    std::vector<std::size_t> order(d);
    for (std::size_t i = 0; i < d; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return eigenvalues[x] > eigenvalues[y]; });

    std::array<Vec, 2> comp;
    for (int cidx = 0; cidx < 2; ++cidx) {
        Vec v(d);
        for (std::size_t i = 0; i < d; ++i) v[i] = vecs(i, order[cidx]);
        for (std::size_t i = 0; i < d; ++i) {
            if (std::abs(v[i]) > 1e-12) {
                if (v[i] < 0.0)
                    for (double& x : v) x = -x;
                break;
            }
        }
        comp[cidx] = std::move(v);
    }

    std::vector<std::array<double, 2>> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec cvec = embeddings[i].values();
        axpy(-1.0, mean, cvec);
        out[i] = {dot(cvec, comp[0]), dot(cvec, comp[1])};
    }
    return out;
}

}  // namespace pucl
