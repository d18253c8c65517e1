#include "sparseoracle/model.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace sparseoracle {

namespace {

int argmax_class(const std::array<index_t, kNumFormats>& counts) {
    int best = 0;
    for (int c = 1; c < kNumFormats; ++c) {
        if (counts[static_cast<std::size_t>(c)] >
            counts[static_cast<std::size_t>(best)]) {
            best = c;
        }
    }
    return best;
}

[[noreturn]] void malformed(int line, const std::string& what) {
    throw MalformedModel("line " + std::to_string(line) + ": " + what);
}

struct LineReader {
    std::istream& in;
    int line_no = 0;
    std::string line;

    bool next() {
        if (!std::getline(in, line)) return false;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++line_no;
        return true;
    }

    void expect() {
        if (!next()) malformed(line_no + 1, "unexpected end of file");
    }
};

long long parse_ll(const std::string& tok, int line) {
    long long v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) {
        malformed(line, "expected integer, got '" + tok + "'");
    }
    return v;
}

double parse_double(const std::string& tok, int line) {
    double v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) {
        malformed(line, "expected number, got '" + tok + "'");
    }
    return v;
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream ss(s);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

// Requires 'key: value' with the given key.
std::string header_value(LineReader& r, const std::string& key) {
    r.expect();
    std::string prefix = key + ": ";
    if (r.line.rfind(prefix, 0) != 0) {
        malformed(r.line_no, "expected '" + key + ": ...'");
    }
    return r.line.substr(prefix.size());
}

DecisionTreeModel read_tree(LineReader& r, int expected_index) {
    r.expect();
    std::vector<std::string> toks = split_ws(r.line);
    if (toks.size() != 4 || toks[0] != "tree" || toks[2] != "nodes") {
        malformed(r.line_no, "expected 'tree <t> nodes <K>'");
    }
    if (parse_ll(toks[1], r.line_no) != expected_index) {
        malformed(r.line_no, "tree index mismatch");
    }
    long long n_nodes = parse_ll(toks[3], r.line_no);
    if (n_nodes < 1) malformed(r.line_no, "node count must be >= 1");

    DecisionTreeModel tree;
    tree.nodes.resize(static_cast<std::size_t>(n_nodes));
    for (long long i = 0; i < n_nodes; ++i) {
        r.expect();
        std::vector<std::string> f = split_ws(r.line);
        if (f.size() != 6 + kNumFormats) {
            malformed(r.line_no, "node line needs " +
                                     std::to_string(6 + kNumFormats) +
                                     " fields, got " + std::to_string(f.size()));
        }
        if (parse_ll(f[0], r.line_no) != i) {
            malformed(r.line_no, "node count mismatch: expected node id " +
                                     std::to_string(i));
        }
        TreeNode& node = tree.nodes[static_cast<std::size_t>(i)];
        long long fi = parse_ll(f[1], r.line_no);
        if (fi < -1 || fi >= kNumFeatures) {
            malformed(r.line_no, "feature_index " + std::to_string(fi) +
                                     " outside -1.." +
                                     std::to_string(kNumFeatures - 1));
        }
        node.feature_index = static_cast<int>(fi);
        node.threshold = parse_double(f[2], r.line_no);
        long long left = parse_ll(f[3], r.line_no);
        long long right = parse_ll(f[4], r.line_no);
        long long cls = parse_ll(f[5], r.line_no);
        index_t count_sum = 0;
        for (int c = 0; c < kNumFormats; ++c) {
            long long v = parse_ll(f[static_cast<std::size_t>(6 + c)], r.line_no);
            if (v < 0) malformed(r.line_no, "negative class count");
            node.class_counts[static_cast<std::size_t>(c)] = v;
            count_sum += v;
        }
        if (count_sum <= 0) malformed(r.line_no, "class counts sum to zero");

        if (node.is_leaf()) {
            if (cls < 0 || cls >= kNumFormats) {
                malformed(r.line_no, "leaf class " + std::to_string(cls) +
                                         " outside 0.." +
                                         std::to_string(kNumFormats - 1));
            }
            if (left != -1 || right != -1) {
                malformed(r.line_no, "leaf node must have children -1");
            }
            node.left = node.right = -1;
            node.predicted_class = static_cast<int>(cls);
        } else {
            if (left < 0 || left >= n_nodes || right < 0 || right >= n_nodes) {
                malformed(r.line_no, "dangling child reference");
            }
            if (cls != -1) {
                malformed(r.line_no, "internal node class must be -1");
            }
            node.left = static_cast<int>(left);
            node.right = static_cast<int>(right);
            node.predicted_class = argmax_class(node.class_counts);
        }
    }

    // Depth walk doubles as a structural check: every node reachable exactly
    // once from the root.
    std::vector<int> depth(tree.nodes.size(), -1);
    std::vector<int> stack = {0};
    depth[0] = 0;
    std::size_t visited = 0;
    while (!stack.empty()) {
        int id = stack.back();
        stack.pop_back();
        ++visited;
        const TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
        tree.depth = std::max(tree.depth, depth[static_cast<std::size_t>(id)]);
        if (node.is_leaf()) continue;
        for (int child : {node.left, node.right}) {
            if (depth[static_cast<std::size_t>(child)] != -1) {
                malformed(r.line_no, "node " + std::to_string(child) +
                                         " referenced more than once");
            }
            depth[static_cast<std::size_t>(child)] =
                depth[static_cast<std::size_t>(id)] + 1;
            stack.push_back(child);
        }
    }
    if (visited != tree.nodes.size()) {
        malformed(r.line_no, "unreachable nodes in tree");
    }
    return tree;
}

void write_tree(std::ostream& out, const DecisionTreeModel& tree, int index) {
    out << "tree " << index << " nodes " << tree.nodes.size() << "\n";
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const TreeNode& n = tree.nodes[i];
        out << i << ' ' << n.feature_index << ' '
            << (n.is_leaf() ? "0" : format_double(n.threshold)) << ' '
            << n.left << ' ' << n.right << ' '
            << (n.is_leaf() ? n.predicted_class : -1);
        for (index_t c : n.class_counts) out << ' ' << c;
        out << "\n";
    }
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

FormatId predict_tree(const DecisionTreeModel& t, const FeatureVector& x) {
    std::array<double, kNumFeatures> row = features_to_row(x);
    const TreeNode* node = &t.root();
    while (!node->is_leaf()) {
        int next = row[static_cast<std::size_t>(node->feature_index)] <=
                           node->threshold
                       ? node->left
                       : node->right;
        node = &t.nodes[static_cast<std::size_t>(next)];
    }
    return static_cast<FormatId>(node->predicted_class);
}

FormatId predict_forest(const ForestModel& f, const FeatureVector& x) {
    std::array<int, kNumFormats> votes{};
    for (const DecisionTreeModel& tree : f.trees) {
        votes[static_cast<std::size_t>(predict_tree(tree, x))]++;
    }
    int best = 0;
    for (int c = 1; c < kNumFormats; ++c) {
        if (votes[static_cast<std::size_t>(c)] >
            votes[static_cast<std::size_t>(best)]) {
            best = c;
        }
    }
    return static_cast<FormatId>(best);
}

void save_model(const ForestModel& f, const std::filesystem::path& path) {
    if (f.trees.empty()) {
        throw InvalidInput("save_model: forest has no trees");
    }
    if (f.kind == ModelKind::tree && f.trees.size() != 1) {
        throw InvalidInput("save_model: kind tree requires exactly one tree");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("save_model: cannot open " + path.string());
    }
    out << "sparse-oracle-model v1\n";
    out << "kind: " << (f.kind == ModelKind::tree ? "tree" : "forest") << "\n";
    out << "n_features: " << kNumFeatures << "\n";
    out << "n_classes: " << kNumFormats << "\n";
    out << "n_trees: " << f.trees.size() << "\n";
    for (const auto& [key, value] : f.metadata) {
        out << "# " << key << "=" << value << "\n";
    }
    for (std::size_t t = 0; t < f.trees.size(); ++t) {
        write_tree(out, f.trees[t], static_cast<int>(t));
    }
    if (!out) {
        throw Error("save_model: write failed for " + path.string());
    }
}

void save_model(const DecisionTreeModel& t, const std::filesystem::path& path,
                std::vector<std::pair<std::string, std::string>> metadata) {
    ForestModel wrapper;
    wrapper.kind = ModelKind::tree;
    wrapper.trees.push_back(t);
    wrapper.metadata = std::move(metadata);
    save_model(wrapper, path);
}

ForestModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw MalformedModel("cannot open " + path.string());
    }
    LineReader r{in, 0, {}};

    r.expect();
    if (r.line != "sparse-oracle-model v1") {
        malformed(r.line_no, "bad magic/version");
    }

    ForestModel f;
    std::string kind = header_value(r, "kind");
    if (kind == "tree") {
        f.kind = ModelKind::tree;
    } else if (kind == "forest") {
        f.kind = ModelKind::forest;
    } else {
        malformed(r.line_no, "kind must be 'tree' or 'forest'");
    }
    if (parse_ll(header_value(r, "n_features"), r.line_no) != kNumFeatures) {
        malformed(r.line_no, "n_features must be " + std::to_string(kNumFeatures));
    }
    if (parse_ll(header_value(r, "n_classes"), r.line_no) != kNumFormats) {
        malformed(r.line_no, "n_classes must be " + std::to_string(kNumFormats));
    }
    long long n_trees = parse_ll(header_value(r, "n_trees"), r.line_no);
    if (n_trees < 1) malformed(r.line_no, "n_trees must be >= 1");
    if (f.kind == ModelKind::tree && n_trees != 1) {
        malformed(r.line_no, "kind tree requires n_trees 1");
    }

    // Metadata comments sit between the header and the first tree.
    std::streampos mark = in.tellg();
    int mark_line = r.line_no;
    while (r.next()) {
        if (r.line.rfind("# ", 0) == 0) {
            std::string body = r.line.substr(2);
            std::size_t eq = body.find('=');
            if (eq == std::string::npos) {
                malformed(r.line_no, "metadata line needs key=value");
            }
            f.metadata.emplace_back(body.substr(0, eq), body.substr(eq + 1));
            mark = in.tellg();
            mark_line = r.line_no;
        } else {
            in.clear();
            in.seekg(mark);
            r.line_no = mark_line;
            break;
        }
    }

    for (long long t = 0; t < n_trees; ++t) {
        f.trees.push_back(read_tree(r, static_cast<int>(t)));
    }
    if (r.next()) {
        malformed(r.line_no, "trailing content after last tree");
    }
    return f;
}

}  // namespace sparseoracle
