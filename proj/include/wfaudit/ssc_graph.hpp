#pragma once

// Supply-chain repository graph: starting from a project's dependency
// manifests, resolve each package to its source repository and recurse into
// the resolved repositories' own manifests up to a depth bound.

#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "wfaudit/workflow_model.hpp"

namespace wfaudit {

struct RepoIdentity {
    std::string host;  // e.g. "github.com", "local"
    std::string owner;
    std::string name;

    // "<owner>/<name>" for the default forge, host-qualified otherwise
    std::string key() const {
        std::string k;
        if (!host.empty() && host != "github.com") k = host + "/";
        return k + owner + "/" + name;
    }
    bool operator<(const RepoIdentity& other) const {
        return std::tie(host, owner, name) < std::tie(other.host, other.owner, other.name);
    }
    bool operator==(const RepoIdentity& other) const {
        return host == other.host && owner == other.owner && name == other.name;
    }
};

enum class DiscoveredVia { Root, Dependency, Explicit };

struct RepoNode {
    RepoIdentity identity;
    DiscoveredVia discovered_via = DiscoveredVia::Dependency;
    std::string parent;  // identity key of the discovering node
    std::string package; // package name that led here
    int depth = 0;       // shortest discovery distance from the root
    std::vector<std::string> workflow_refs; // filled by the collector
};

struct UnresolvedPackage {
    std::string package;
    std::string requested_by; // identity key
};

struct SscGraph {
    RepoIdentity root;
    std::vector<RepoNode> nodes; // discovery order; identities unique
    std::set<std::pair<std::string, std::string>> edges; // (from key, to key)
    std::vector<UnresolvedPackage> unresolved;
    std::vector<std::string> warnings;
    bool resolver_degraded = false;

    const RepoNode* find(const std::string& key) const {
        for (const auto& n : nodes)
            if (n.identity.key() == key) return &n;
        return nullptr;
    }
};

class ResolverUnavailableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Maps package names to source repositories and lists the packages a
// repository itself depends on. Backed by live registry metadata or by
// recorded fixtures; must be safe for concurrent queries.
class DependencyResolver {
public:
    virtual ~DependencyResolver() = default;
    // nullopt: the package exists but its metadata names no source repository.
    virtual std::optional<RepoIdentity> resolve_package(const std::string& package) = 0;
    virtual std::vector<std::string> repo_dependencies(const RepoIdentity& repo) = 0;
};

// ---------------------------------------------------------------------------
// Manifest parsing (Python ecosystem)

namespace detail {

// PEP 503 name normalization: case-insensitive, runs of -_. collapse to -.
inline std::string normalize_package_name(std::string_view name) {
    std::string out;
    out.reserve(name.size());
    bool last_sep = false;
    for (char c : name) {
        if (c == '-' || c == '_' || c == '.') {
            if (!last_sep && !out.empty()) out += '-';
            last_sep = true;
        } else {
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            last_sep = false;
        }
    }
    while (!out.empty() && out.back() == '-') out.pop_back();
    return out;
}

// One requirement specifier -> package name (version constraints, extras,
// and environment markers stripped). Empty result means "not a dependency
// line" (options, includes, URLs).
inline std::string requirement_name(std::string_view line) {
    std::string_view s = trim_view(line);
    if (s.empty() || s.front() == '#' || s.front() == '-') return {};
    // drop inline comments and markers
    for (const char* cut : {" #", ";"}) {
        if (size_t p = s.find(cut); p != std::string_view::npos) s = s.substr(0, p);
    }
    // direct URL requirements carry no registry name we can resolve
    if (s.find("://") != std::string_view::npos) return {};
    size_t end = 0;
    while (end < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[end])) || s[end] == '-' ||
            s[end] == '_' || s[end] == '.'))
        ++end;
    if (end == 0) return {};
    return normalize_package_name(s.substr(0, end));
}

} // namespace detail

inline std::vector<std::string> parse_requirements_txt(const std::string& text) {
    std::vector<std::string> packages;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::string name = detail::requirement_name(line);
        if (!name.empty() && seen.insert(name).second) packages.push_back(name);
    }
    return packages;
}

// Minimal extraction of `[project] dependencies = [...]` from a pyproject
// file. Good enough for graph purposes; full TOML fidelity is not required
// because only the specifier strings are consumed.
inline std::vector<std::string> parse_pyproject_toml(const std::string& text) {
    std::vector<std::string> packages;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    bool in_project = false;
    bool in_deps = false;
    while (std::getline(in, line)) {
        std::string_view s = detail::trim_view(line);
        if (!s.empty() && s.front() == '[') {
            in_project = (s == "[project]");
            in_deps = false;
            continue;
        }
        if (in_project && s.rfind("dependencies", 0) == 0 &&
            s.find('=') != std::string_view::npos) {
            in_deps = true;
            s = s.substr(s.find('=') + 1);
        }
        if (!in_deps) continue;
        // collect quoted specifiers until the closing bracket
        std::string buf(s);
        size_t i = 0;
        while (i < buf.size()) {
            char q = buf[i];
            if (q == '"' || q == '\'') {
                size_t close = buf.find(q, i + 1);
                if (close == std::string::npos) break;
                std::string name = detail::requirement_name(
                    std::string_view(buf).substr(i + 1, close - i - 1));
                if (!name.empty() && seen.insert(name).second) packages.push_back(name);
                i = close + 1;
            } else if (q == ']') {
                in_deps = false;
                break;
            } else {
                ++i;
            }
        }
    }
    return packages;
}

// Reads the supported manifests of a local project directory. Returns
// nullopt when none exist.
inline std::optional<std::vector<std::string>> read_local_manifests(
    const std::filesystem::path& project_dir) {
    std::vector<std::string> packages;
    std::set<std::string> seen;
    bool found = false;

    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };

    auto add_all = [&](const std::vector<std::string>& names) {
        for (const auto& n : names)
            if (seen.insert(n).second) packages.push_back(n);
    };

    std::error_code ec;
    if (std::filesystem::exists(project_dir / "requirements.txt", ec)) {
        found = true;
        add_all(parse_requirements_txt(slurp(project_dir / "requirements.txt")));
    }
    if (std::filesystem::exists(project_dir / "pyproject.toml", ec)) {
        found = true;
        add_all(parse_pyproject_toml(slurp(project_dir / "pyproject.toml")));
    }
    if (!found) return std::nullopt;
    return packages;
}

// ---------------------------------------------------------------------------

// Breadth-first reconstruction of the repository graph. Each identity is
// expanded at most once, so arbitrary dependency cycles terminate; nodes
// discovered beyond max_depth are not expanded or added.
inline SscGraph build_graph(const std::filesystem::path& project_dir,
                            DependencyResolver& resolver, int max_depth) {
    SscGraph graph;
    graph.root = RepoIdentity{"local", "project",
                              project_dir.filename().empty()
                                  ? project_dir.parent_path().filename().string()
                                  : project_dir.filename().string()};
    if (graph.root.name.empty()) graph.root.name = "project";

    RepoNode root_node;
    root_node.identity = graph.root;
    root_node.discovered_via = DiscoveredVia::Root;
    root_node.depth = 0;
    graph.nodes.push_back(root_node);

    auto local = read_local_manifests(project_dir);
    if (!local) {
        graph.warnings.push_back("no supported dependency manifest found in " +
                                 project_dir.string());
        return graph;
    }

    std::map<std::string, size_t> index{{graph.root.key(), 0}};
    std::set<std::string> expanded;
    std::deque<std::pair<std::string, int>> queue; // (identity key, depth)
    queue.emplace_back(graph.root.key(), 0);
    expanded.insert(graph.root.key());

    auto dependencies_of = [&](const RepoNode& node) -> std::vector<std::string> {
        if (node.discovered_via == DiscoveredVia::Root) return *local;
        return resolver.repo_dependencies(node.identity);
    };

    while (!queue.empty()) {
        auto [key, depth] = queue.front();
        queue.pop_front();
        if (depth >= max_depth) continue;

        const RepoNode node = graph.nodes[index.at(key)];
        std::vector<std::string> packages;
        try {
            packages = dependencies_of(node);
        } catch (const ResolverUnavailableError&) {
            graph.resolver_degraded = true;
            continue;
        }

        for (const auto& package : packages) {
            std::optional<RepoIdentity> target;
            try {
                target = resolver.resolve_package(package);
            } catch (const ResolverUnavailableError&) {
                graph.resolver_degraded = true;
                continue;
            }
            if (!target) {
                graph.unresolved.push_back({package, key});
                continue;
            }
            const std::string tkey = target->key();
            if (tkey == key) continue; // self-dependency
            graph.edges.insert({key, tkey});
            if (!index.count(tkey)) {
                RepoNode n;
                n.identity = *target;
                n.discovered_via = DiscoveredVia::Dependency;
                n.parent = key;
                n.package = package;
                n.depth = depth + 1;
                index[tkey] = graph.nodes.size();
                graph.nodes.push_back(std::move(n));
            }
            if (expanded.insert(tkey).second) queue.emplace_back(tkey, depth + 1);
        }
    }
    return graph;
}

// Builds a graph from an explicit repository list ("owner/name" or
// "host/owner/name" per line), bypassing manifests entirely.
inline SscGraph graph_from_repo_list(const std::vector<std::string>& identities) {
    SscGraph graph;
    graph.root = RepoIdentity{"local", "explicit", "repo-list"};
    std::set<std::string> seen;
    for (const auto& raw : identities) {
        std::string_view s = detail::trim_view(raw);
        if (s.empty() || s.front() == '#') continue;
        std::vector<std::string> parts;
        size_t start = 0;
        while (start <= s.size()) {
            size_t slash = s.find('/', start);
            if (slash == std::string_view::npos) {
                parts.emplace_back(s.substr(start));
                break;
            }
            parts.emplace_back(s.substr(start, slash - start));
            start = slash + 1;
        }
        RepoIdentity id;
        if (parts.size() == 2)
            id = {"github.com", parts[0], parts[1]};
        else if (parts.size() == 3)
            id = {parts[0], parts[1], parts[2]};
        else
            continue;
        if (!seen.insert(id.key()).second) continue;
        RepoNode node;
        node.identity = id;
        node.discovered_via = DiscoveredVia::Explicit;
        node.depth = 0;
        graph.nodes.push_back(std::move(node));
    }
    if (!graph.nodes.empty()) graph.root = graph.nodes.front().identity;
    return graph;
}

// Deterministic enumeration of the distinct repositories in a graph.
inline std::vector<RepoNode> unique_repositories(const SscGraph& graph) {
    std::vector<RepoNode> out = graph.nodes;
    std::sort(out.begin(), out.end(), [](const RepoNode& a, const RepoNode& b) {
        return a.identity < b.identity;
    });
    return out;
}

} // namespace wfaudit
