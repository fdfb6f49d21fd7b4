#pragma once

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ctxsense/behavior.hpp"
#include "ctxsense/common.hpp"
#include "ctxsense/ensemble.hpp"
#include "ctxsense/environment.hpp"
#include "ctxsense/features.hpp"
#include "ctxsense/tree.hpp"

namespace ctxsense {

inline constexpr const char* kModelVersionTag = "ctxmodel-v1";

// Everything a run needs: the human-vehicle tree (raw feature space), the two
// behaviour ensembles and the two environment ensembles with their
// per-feature normalization. Text format, %.17g doubles, so save -> load
// reproduces predictions exactly.
//
// Layout (whitespace-separated tokens, one logical item per line):
//
//   ctxmodel-v1
//   config window_s <f> sample_rate <f> cn0_threshold <f>
//   section human_vehicle
//     tree classes <n> features <d> nodes <n>
//     { split <feature> <threshold> <left> <right> | leaf <p...> } per node
//   section human_activity | vehicle_motion | environment3 | environment2
//     standardizer <d>  then one mean row and one scale row of d values
//     classes <L> <name...>
//     priors  then L values
//     per pair (i < j, +1 label = class i):
//       pair <i> <j>
//       kernel {rbf|linear} <gamma> beta <beta>
//       platt <A> <B>
//       bias <b>
//       sv <count>  then one row per support vector: <alpha*y> <d values>
//   end
struct ModelBundle {
    double window_s = 4.0;
    double sample_rate = 100.0;
    double cn0_threshold = 25.0;

    DecisionTreeModel human_vehicle;

    OneVsOneEnsemble human_activity;
    Standardizer human_std;

    OneVsOneEnsemble vehicle_motion;
    Standardizer vehicle_std;

    OneVsOneEnsemble environment3;  // pedestrian mode
    Standardizer env3_std;

    OneVsOneEnsemble environment2;  // vehicle mode
    Standardizer env2_std;

    BehaviorModels behavior_models() const {
        return BehaviorModels{human_vehicle, human_activity, vehicle_motion};
    }
};

namespace model_detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_vector(std::ostream& os, const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << fmt(v[i]);
    os << '\n';
}

inline void write_standardizer(std::ostream& os, const Standardizer& s) {
    os << "standardizer " << s.mean.size() << '\n';
    write_vector(os, s.mean);
    write_vector(os, s.scale);
}

inline void write_tree(std::ostream& os, const DecisionTreeModel& t) {
    os << "tree classes " << t.num_classes << " features " << t.num_features << " nodes "
       << t.nodes.size() << '\n';
    for (const TreeNode& n : t.nodes) {
        if (n.leaf) {
            os << "leaf";
            for (double p : n.distribution) os << ' ' << fmt(p);
            os << '\n';
        } else {
            os << "split " << n.feature << ' ' << fmt(n.threshold) << ' ' << n.left << ' '
               << n.right << '\n';
        }
    }
}

inline void write_ensemble(std::ostream& os, const OneVsOneEnsemble& e) {
    os << "classes " << e.classes.size();
    for (const auto& c : e.classes) os << ' ' << c;
    os << '\n';
    os << "priors\n";
    write_vector(os, e.class_priors);
    for (std::size_t i = 0; i < e.classes.size(); ++i) {
        for (std::size_t j = i + 1; j < e.classes.size(); ++j) {
            const SvmBinaryModel& m = e.pairwise[e.pair_index(i, j)];
            os << "pair " << i << ' ' << j << '\n';
            os << "kernel " << (m.kernel.kind == KernelKind::Rbf ? "rbf" : "linear") << ' '
               << fmt(m.kernel.gamma) << " beta " << fmt(m.regularization) << '\n';
            os << "platt " << fmt(m.platt.a) << ' ' << fmt(m.platt.b) << '\n';
            os << "bias " << fmt(m.bias) << '\n';
            os << "sv " << m.support_vectors.size() << '\n';
            for (std::size_t k = 0; k < m.support_vectors.size(); ++k) {
                os << fmt(m.coefficients[k]);
                for (double v : m.support_vectors[k]) os << ' ' << fmt(v);
                os << '\n';
            }
        }
    }
}

// Whitespace-token reader with contextual error messages.
class TokenReader {
public:
    explicit TokenReader(std::istream& in) : in_(in) {}

    std::string word() {
        std::string w;
        if (!(in_ >> w)) throw model_error("model file: unexpected end of input");
        return w;
    }

    void expect(const std::string& literal) {
        const std::string w = word();
        if (w != literal)
            throw model_error("model file: expected '" + literal + "', got '" + w + "'");
    }

    double number() {
        const std::string w = word();
        try {
            std::size_t used = 0;
            const double v = std::stod(w, &used);
            if (used != w.size()) throw std::invalid_argument(w);
            return v;
        } catch (const std::exception&) {
            throw model_error("model file: expected number, got '" + w + "'");
        }
    }

    std::size_t count() {
        const double v = number();
        if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
            throw model_error("model file: expected nonnegative integer");
        return static_cast<std::size_t>(v);
    }

private:
    std::istream& in_;
};

inline std::vector<double> read_vector(TokenReader& r, std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = r.number();
    return v;
}

inline Standardizer read_standardizer(TokenReader& r) {
    r.expect("standardizer");
    const std::size_t d = r.count();
    Standardizer s;
    s.mean = read_vector(r, d);
    s.scale = read_vector(r, d);
    return s;
}

inline DecisionTreeModel read_tree(TokenReader& r) {
    r.expect("tree");
    r.expect("classes");
    DecisionTreeModel t;
    t.num_classes = r.count();
    r.expect("features");
    t.num_features = r.count();
    r.expect("nodes");
    const std::size_t n = r.count();
    t.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::string kind = r.word();
        if (kind == "leaf") {
            t.nodes[i].leaf = true;
            t.nodes[i].distribution = read_vector(r, t.num_classes);
        } else if (kind == "split") {
            t.nodes[i].leaf = false;
            t.nodes[i].feature = r.count();
            t.nodes[i].threshold = r.number();
            t.nodes[i].left = r.count();
            t.nodes[i].right = r.count();
        } else {
            throw model_error("model file: unknown tree node kind '" + kind + "'");
        }
    }
    return t;
}

inline OneVsOneEnsemble read_ensemble(TokenReader& r, std::size_t dims) {
    OneVsOneEnsemble e;
    r.expect("classes");
    const std::size_t L = r.count();
    for (std::size_t i = 0; i < L; ++i) e.classes.push_back(r.word());
    r.expect("priors");
    e.class_priors = read_vector(r, L);
    for (std::size_t i = 0; i < L; ++i) {
        for (std::size_t j = i + 1; j < L; ++j) {
            r.expect("pair");
            if (r.count() != i || r.count() != j)
                throw model_error("model file: pairwise models out of order");
            SvmBinaryModel m;
            r.expect("kernel");
            const std::string kind = r.word();
            if (kind == "rbf") m.kernel.kind = KernelKind::Rbf;
            else if (kind == "linear") m.kernel.kind = KernelKind::Linear;
            else throw model_error("model file: unknown kernel '" + kind + "'");
            m.kernel.gamma = r.number();
            r.expect("beta");
            m.regularization = r.number();
            r.expect("platt");
            m.platt.a = r.number();
            m.platt.b = r.number();
            r.expect("bias");
            m.bias = r.number();
            r.expect("sv");
            const std::size_t nsv = r.count();
            for (std::size_t k = 0; k < nsv; ++k) {
                m.coefficients.push_back(r.number());
                m.support_vectors.push_back(read_vector(r, dims));
            }
            e.pairwise.push_back(std::move(m));
        }
    }
    return e;
}

}  // namespace model_detail

inline void save_model(std::ostream& os, const ModelBundle& m) {
    using model_detail::fmt;
    os << kModelVersionTag << '\n';
    os << "config window_s " << fmt(m.window_s) << " sample_rate " << fmt(m.sample_rate)
       << " cn0_threshold " << fmt(m.cn0_threshold) << '\n';

    os << "section human_vehicle\n";
    model_detail::write_tree(os, m.human_vehicle);

    os << "section human_activity\n";
    model_detail::write_standardizer(os, m.human_std);
    model_detail::write_ensemble(os, m.human_activity);

    os << "section vehicle_motion\n";
    model_detail::write_standardizer(os, m.vehicle_std);
    model_detail::write_ensemble(os, m.vehicle_motion);

    os << "section environment3\n";
    model_detail::write_standardizer(os, m.env3_std);
    model_detail::write_ensemble(os, m.environment3);

    os << "section environment2\n";
    model_detail::write_standardizer(os, m.env2_std);
    model_detail::write_ensemble(os, m.environment2);

    os << "end\n";
}

inline ModelBundle load_model(std::istream& in) {
    model_detail::TokenReader r(in);
    const std::string tag = r.word();
    if (tag != kModelVersionTag)
        throw model_error("model file: unsupported version tag '" + tag + "'");

    ModelBundle m;
    r.expect("config");
    r.expect("window_s");
    m.window_s = r.number();
    r.expect("sample_rate");
    m.sample_rate = r.number();
    r.expect("cn0_threshold");
    m.cn0_threshold = r.number();

    r.expect("section");
    r.expect("human_vehicle");
    m.human_vehicle = model_detail::read_tree(r);

    r.expect("section");
    r.expect("human_activity");
    m.human_std = model_detail::read_standardizer(r);
    m.human_activity = model_detail::read_ensemble(r, m.human_std.mean.size());

    r.expect("section");
    r.expect("vehicle_motion");
    m.vehicle_std = model_detail::read_standardizer(r);
    m.vehicle_motion = model_detail::read_ensemble(r, m.vehicle_std.mean.size());

    r.expect("section");
    r.expect("environment3");
    m.env3_std = model_detail::read_standardizer(r);
    m.environment3 = model_detail::read_ensemble(r, m.env3_std.mean.size());

    r.expect("section");
    r.expect("environment2");
    m.env2_std = model_detail::read_standardizer(r);
    m.environment2 = model_detail::read_ensemble(r, m.env2_std.mean.size());

    r.expect("end");
    return m;
}

}  // namespace ctxsense
