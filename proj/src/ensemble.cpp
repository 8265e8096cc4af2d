#include "spiderp/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "spiderp/csv.hpp"
#include "spiderp/errors.hpp"

namespace spiderp {

std::vector<std::vector<std::string>> group_kfold(const std::vector<SubjectWindowStats>& subjects,
                                                  int k, uint64_t /*seed*/) {
    if (k < 2) throw TooFewSubjects("group_kfold: k must be at least 2");
    if (static_cast<size_t>(k) > subjects.size())
        throw TooFewSubjects("group_kfold: k=" + std::to_string(k) + " exceeds " +
                             std::to_string(subjects.size()) + " subjects");

    auto order = subjects;
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        const double fa = a.n_windows ? static_cast<double>(a.n_positive) / a.n_windows : 0.0;
        const double fb = b.n_windows ? static_cast<double>(b.n_positive) / b.n_windows : 0.0;
        if (fa != fb) return fa > fb;
        return a.id < b.id;
    });

    size_t total_windows = 0, total_positive = 0;
    for (const auto& s : subjects) {
        total_windows += s.n_windows;
        total_positive += s.n_positive;
    }
    const double global_frac =
        total_windows ? static_cast<double>(total_positive) / total_windows : 0.0;

    std::vector<std::vector<std::string>> folds(k);
    std::vector<size_t> fold_windows(k, 0), fold_positive(k, 0);

    for (const auto& s : order) {
        size_t min_size = subjects.size();
        for (const auto& f : folds) min_size = std::min(min_size, f.size());
        int best = -1;
        double best_dev = 0.0;
        for (int f = 0; f < k; ++f) {
            if (folds[f].size() != min_size) continue;
            const size_t w = fold_windows[f] + s.n_windows;
            const size_t p = fold_positive[f] + s.n_positive;
            const double frac = w ? static_cast<double>(p) / w : 0.0;
            const double dev = std::abs(frac - global_frac);
            if (best < 0 || dev < best_dev) {
                best = f;
                best_dev = dev;
            }
        }
        folds[best].push_back(s.id);
        fold_windows[best] += s.n_windows;
        fold_positive[best] += s.n_positive;
    }
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

Dataset windows_to_dataset(const std::vector<FeatureWindow>& windows) {
    Dataset d;
    d.dim = kFeatureDim;
    for (const auto& w : windows) {
        if (!w.fr_label) continue;
        d.x.insert(d.x.end(), w.features.begin(), w.features.end());
        d.y.push_back(static_cast<double>(*w.fr_label));
        ++d.n;
    }
    return d;
}

namespace {

std::vector<SubjectWindowStats> subject_stats(const std::vector<FeatureWindow>& windows) {
    std::map<std::string, SubjectWindowStats> by_id;
    for (const auto& w : windows) {
        if (!w.fr_label) continue;
        auto& s = by_id[w.subject_id];
        s.id = w.subject_id;
        ++s.n_windows;
        if (*w.fr_label == 1) ++s.n_positive;
    }
    std::vector<SubjectWindowStats> out;
    out.reserve(by_id.size());
    for (auto& [id, s] : by_id) out.push_back(std::move(s));
    return out;
}

template <bool Parallel>
FrEnsemble train_ensemble_impl(const std::vector<FeatureWindow>& source_windows, int k,
                               const MlpConfig& config) {
    const auto stats = subject_stats(source_windows);
    FrEnsemble ens;
    ens.config = config;
    ens.folds = group_kfold(stats, k, config.seed);
    ens.members.resize(k);

    std::vector<Dataset> train_sets(k);
    for (int i = 0; i < k; ++i) {
        const std::set<std::string> held_out(ens.folds[i].begin(), ens.folds[i].end());
        std::vector<FeatureWindow> train;
        train.reserve(source_windows.size());
        for (const auto& w : source_windows)
            if (w.fr_label && !held_out.count(w.subject_id)) train.push_back(w);
        train_sets[i] = windows_to_dataset(train);
    }

    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic) if (Parallel)
    for (int i = 0; i < k; ++i) {
        try {
            MlpConfig member_cfg = config;
            member_cfg.seed = config.seed + static_cast<uint64_t>(i);
            ens.members[i] = train_mlp(train_sets[i], member_cfg);
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    return ens;
}

}  // namespace

FrEnsemble train_ensemble(const std::vector<FeatureWindow>& source_windows, int k,
                          const MlpConfig& config) {
    return train_ensemble_impl<true>(source_windows, k, config);
}

FrEnsemble train_ensemble_serial(const std::vector<FeatureWindow>& source_windows, int k,
                                 const MlpConfig& config) {
    return train_ensemble_impl<false>(source_windows, k, config);
}

double score(const FrEnsemble& ensemble, const FeatureWindow& window) {
    for (double f : window.features)
        if (!std::isfinite(f)) throw NonFiniteFeature("score: window has a non-finite feature");
    double sum = 0.0;
    for (const auto& m : ensemble.members) sum += m.forward(window.features);
    return sum / static_cast<double>(ensemble.members.size());
}

std::vector<double> score_all(const FrEnsemble& ensemble,
                              const std::vector<FeatureWindow>& windows) {
    std::vector<double> scores(windows.size());
    std::exception_ptr error;
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(windows.size()); ++i) {
        try {
            scores[i] = score(ensemble, windows[i]);
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    return scores;
}

std::vector<double> score_all_serial(const FrEnsemble& ensemble,
                                     const std::vector<FeatureWindow>& windows) {
    std::vector<double> scores;
    scores.reserve(windows.size());
    for (const auto& w : windows) scores.push_back(score(ensemble, w));
    return scores;
}

std::vector<double> fold_accuracies(const FrEnsemble& ensemble,
                                    const std::vector<FeatureWindow>& source_windows) {
    std::vector<double> acc(ensemble.members.size(), 0.0);
    for (size_t i = 0; i < ensemble.members.size(); ++i) {
        const std::set<std::string> held_out(ensemble.folds[i].begin(), ensemble.folds[i].end());
        std::vector<FeatureWindow> fold;
        for (const auto& w : source_windows)
            if (w.fr_label && held_out.count(w.subject_id)) fold.push_back(w);
        acc[i] = accuracy(ensemble.members[i], windows_to_dataset(fold));
    }
    return acc;
}

void save_ensemble(const FrEnsemble& ensemble, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    const auto& c = ensemble.config;
    out << "spiderp-fr v1\n";
    out << "k " << ensemble.k() << "\n";
    out << "config " << c.n_units << ' ' << c.depth << ' ' << c.epochs << ' ' << c.batch_size
        << ' ' << format_full(c.learning_rate) << ' ' << format_full(c.momentum) << ' '
        << format_full(c.weight_decay) << ' ' << c.seed << "\n";
    for (int i = 0; i < ensemble.k(); ++i) {
        out << "fold " << i;
        for (const auto& id : ensemble.folds[i]) out << ' ' << id;
        out << "\n";
    }
    for (int i = 0; i < ensemble.k(); ++i) {
        const auto& m = ensemble.members[i];
        out << "member " << i << " layers " << m.layers().size() << "\n";
        for (const auto& L : m.layers()) {
            out << "layer " << L.in << ' ' << L.out << "\n";
            out << "w";
            for (double w : L.w) out << ' ' << format_full(w);
            out << "\nb";
            for (double b : L.b) out << ' ' << format_full(b);
            out << "\n";
        }
    }
    out << "end\n";
}

FrEnsemble load_ensemble(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFile("cannot open " + path.string());
    auto fail = [&](const std::string& why) -> IoError {
        return IoError("bad model file " + path.string() + ": " + why);
    };

    std::string line;
    if (!std::getline(in, line) || line != "spiderp-fr v1") throw fail("unknown header");

    FrEnsemble ens;
    int k = 0;
    {
        std::string tag;
        in >> tag >> k;
        if (tag != "k" || k < 2) throw fail("bad fold count");
        in >> tag;
        if (tag != "config") throw fail("missing config");
        auto& c = ens.config;
        in >> c.n_units >> c.depth >> c.epochs >> c.batch_size >> c.learning_rate >> c.momentum >>
            c.weight_decay >> c.seed;
        if (!in) throw fail("truncated config");
    }
    std::getline(in, line);  // rest of config line
    ens.folds.resize(k);
    for (int i = 0; i < k; ++i) {
        if (!std::getline(in, line)) throw fail("truncated folds");
        std::istringstream ss(line);
        std::string tag, id;
        int idx;
        ss >> tag >> idx;
        if (tag != "fold" || idx != i) throw fail("bad fold line");
        while (ss >> id) ens.folds[i].push_back(id);
    }
    ens.members.resize(k);
    for (int i = 0; i < k; ++i) {
        std::string tag;
        int idx = 0;
        size_t n_layers = 0;
        in >> tag >> idx;
        if (tag != "member" || idx != i) throw fail("bad member line");
        in >> tag >> n_layers;
        if (tag != "layers") throw fail("bad member header");
        auto& layers = ens.members[i].layers();
        layers.resize(n_layers);
        for (auto& L : layers) {
            in >> tag >> L.in >> L.out;
            if (tag != "layer" || L.in <= 0 || L.out <= 0) throw fail("bad layer header");
            L.w.resize(static_cast<size_t>(L.in) * L.out);
            L.b.resize(static_cast<size_t>(L.out));
            in >> tag;
            if (tag != "w") throw fail("missing weights");
            for (auto& w : L.w) in >> w;
            in >> tag;
            if (tag != "b") throw fail("missing biases");
            for (auto& b : L.b) in >> b;
        }
        if (!in) throw fail("truncated member " + std::to_string(i));
    }
    return ens;
}

}  // namespace spiderp
