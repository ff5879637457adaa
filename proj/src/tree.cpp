#include "punct/tree.hpp"

namespace punct {

std::size_t ConstituencyTree::node_count() const {
    std::size_t n = 1;
    for (const ConstituencyTree& c : children) n += c.node_count();
    return n;
}

namespace {

struct Parser {
    std::string_view s;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw Error("tree parse error at offset " + std::to_string(pos) + ": " + what);
    }

    void skip_ws() {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '\n' ||
                                  s[pos] == '\r'))
            ++pos;
    }

    bool at_delim() const {
        return pos >= s.size() || s[pos] == '(' || s[pos] == ')' || s[pos] == ' ' ||
               s[pos] == '\t' || s[pos] == '\n' || s[pos] == '\r';
    }

    std::string atom() {
        std::size_t start = pos;
        while (!at_delim()) ++pos;
        if (pos == start) fail("expected a label or token");
        return std::string(s.substr(start, pos - start));
    }

    ConstituencyTree node() {
        if (pos >= s.size() || s[pos] != '(') fail("expected '('");
        ++pos;
        skip_ws();
        if (pos < s.size() && s[pos] == ')') fail("empty node");
        ConstituencyTree t;
        t.label = atom();
        bool any_child = false;
        while (true) {
            skip_ws();
            if (pos >= s.size()) fail("unbalanced parentheses: missing ')'");
            if (s[pos] == ')') {
                ++pos;
                if (!any_child) fail("node '" + t.label + "' has no children");
                return t;
            }
            if (s[pos] == '(') {
                t.children.push_back(node());
            } else {
                t.children.push_back(ConstituencyTree{atom(), {}});
            }
            any_child = true;
        }
    }
};

}  // namespace

ConstituencyTree parse_bracketed(std::string_view s) {
    Parser p{s};
    p.skip_ws();
    if (p.pos >= s.size()) p.fail("empty input");
    if (s[p.pos] != '(') p.fail("expected '('");
    ConstituencyTree t = p.node();
    p.skip_ws();
    if (p.pos < s.size()) p.fail("unbalanced parentheses: trailing content");
    return t;
}

namespace {

void render_into(const ConstituencyTree& t, std::string& out) {
    if (t.is_leaf()) {
        out += t.label;
        return;
    }
    out += '(';
    out += t.label;
    for (const ConstituencyTree& c : t.children) {
        out += ' ';
        render_into(c, out);
    }
    out += ')';
}

}  // namespace

std::string render_bracketed(const ConstituencyTree& t) {
    std::string out;
    if (t.is_leaf()) {
        // a bare leaf is not re-parseable on its own; wrap-free by contract
        out = t.label;
        return out;
    }
    render_into(t, out);
    return out;
}

ConstituencyTree merge_under_root(std::vector<ConstituencyTree> trees) {
    if (trees.empty()) throw Error("merge_under_root: no trees");
    ConstituencyTree root;
    root.label = "ROOT";
    root.children = std::move(trees);
    return root;
}

namespace {

void preorder(const ConstituencyTree& t, std::size_t max_nodes,
              std::vector<std::string>& out) {
    if (out.size() >= max_nodes) return;
    out.push_back(t.label);
    for (const ConstituencyTree& c : t.children) preorder(c, max_nodes, out);
}

}  // namespace

std::vector<std::string> traverse(const ConstituencyTree& t, std::size_t max_nodes) {
    if (max_nodes < 1) throw Error("traverse: max_nodes must be >= 1");
    std::vector<std::string> out;
    out.reserve(std::min(max_nodes, t.node_count()));
    preorder(t, max_nodes, out);
    return out;
}

namespace {

void collect_internal(const ConstituencyTree& t, std::vector<std::string>& out) {
    if (t.is_leaf()) return;
    out.push_back(t.label);
    for (const ConstituencyTree& c : t.children) collect_internal(c, out);
}

}  // namespace

std::vector<std::string> internal_labels(const ConstituencyTree& t) {
    std::vector<std::string> out;
    collect_internal(t, out);
    return out;
}

ConstituencyTree flat_fallback_tree(std::span<const Token> tokens) {
    if (tokens.empty()) throw Error("flat_fallback_tree: no tokens");
    ConstituencyTree sent;
    sent.label = "S";
    sent.children.reserve(tokens.size());
    for (const Token& tok : tokens) {
        ConstituencyTree pre;
        pre.label = tok.is_punctuation ? "PUNCT" : "TOK";
        pre.children.push_back(ConstituencyTree{tok.surface, {}});
        sent.children.push_back(std::move(pre));
    }
    ConstituencyTree root;
    root.label = "ROOT";
    root.children.push_back(std::move(sent));
    return root;
}

}  // namespace punct
