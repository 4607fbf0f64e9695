#pragma once

// Semantic model of a CI workflow file: triggers, jobs, steps, permissions,
// and every `${{ ... }}` template with its location in the source text.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <yaml-cpp/yaml.h>

namespace wfaudit {

enum class ParseErrorKind {
    MalformedYaml,  // unparseable text
    NotAWorkflow,   // no `on`/`jobs`, extra documents, structurally invalid
    EmptyJobs,      // `jobs:` present but empty
};

class WorkflowParseError : public std::runtime_error {
public:
    WorkflowParseError(ParseErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}
    ParseErrorKind kind() const { return kind_; }

private:
    ParseErrorKind kind_;
};

// A scalar value plus the position of its node in the source (1-based).
// For block scalars the position is the indicator line; the content follows.
struct Scalar {
    std::string text;
    int line = 0;
    int column = 0;
};

enum class RefKind { Tag, Branch, CommitSha, LocalPath, DockerImage };

struct ActionRef {
    std::string owner;
    std::string repo;
    std::string subpath;   // "" when the action lives at the repo root
    RefKind kind = RefKind::Branch;
    std::string ref;       // tag/branch name, 40-hex sha, local path, or image
    std::string spec_text; // the `uses:` value as written

    bool is_remote() const {
        return kind == RefKind::Tag || kind == RefKind::Branch ||
               kind == RefKind::CommitSha;
    }
    bool is_pinned() const { return kind == RefKind::CommitSha; }
    std::string repo_key() const { return owner + "/" + repo; }

    static ActionRef parse(const std::string& uses);
};

enum class PermissionMode { None, ReadAll, WriteAll, Scoped };

struct PermissionDecl {
    PermissionMode mode = PermissionMode::None;
    std::vector<std::pair<std::string, std::string>> scopes; // scope -> access
    std::vector<std::string> unknown_scopes;
    int line = 0; // line of the `permissions` key
};

struct TriggerEvent {
    std::string event_name; // lowercase, non-empty
    std::vector<std::string> activity_types;
    std::vector<std::string> unknown_activity_types; // subset not in the vocabulary
    std::vector<std::pair<std::string, std::vector<std::string>>> filters;
};

enum class ExprSite { RunScript, EnvValue, WithInput, Conditional, Other };

struct ExpressionOccurrence {
    std::string path;   // normalized dotted context path, "" when none
    ExprSite site = ExprSite::Other;
    std::string job_id; // "" at workflow level or when unattributed
    int step_index = 0; // 0 at workflow/job level
    int line = 0;       // 1-based line in raw_lines containing `raw`
    int column = 0;     // 1-based column of the opening `${{`
    std::string raw;    // the literal `${{ ... }}` text
    bool composed = false;
    bool malformed = false; // unterminated `${{`
    bool has_path = false;  // normalize_context_path succeeded
};

struct StepModel {
    int index = 0; // 1-based position within the job
    std::optional<std::string> display_name;
    std::optional<Scalar> run_script;
    std::optional<ActionRef> uses;
    int uses_line = 0; // line of the `uses:` entry, 0 when absent
    std::vector<std::pair<std::string, Scalar>> env;
    std::vector<std::pair<std::string, Scalar>> with_inputs;
    std::optional<Scalar> conditional;
    int line = 0; // 1-based line of the step's first key
};

struct JobModel {
    std::string job_id;
    std::optional<std::string> display_name;
    std::optional<PermissionDecl> permissions;
    std::vector<std::pair<std::string, Scalar>> env;
    std::vector<StepModel> steps;
    std::optional<ActionRef> reusable_workflow; // job-level `uses:`
    int uses_line = 0;
    std::optional<Scalar> conditional; // job-level `if:`
    int line = 0;
};

struct WorkflowModel {
    std::optional<std::string> name;
    std::string source_path;
    std::vector<TriggerEvent> triggers;
    std::optional<PermissionDecl> permissions; // workflow level
    std::vector<JobModel> jobs;                // ordered as written
    std::vector<std::pair<std::string, Scalar>> env; // workflow-level env
    std::vector<std::string> raw_lines;

    const JobModel* find_job(const std::string& id) const {
        for (const auto& j : jobs)
            if (j.job_id == id) return &j;
        return nullptr;
    }
    std::string line_text(int line_number) const {
        if (line_number < 1 || line_number > static_cast<int>(raw_lines.size()))
            return {};
        return raw_lines[line_number - 1];
    }
};

struct NormalizedPath {
    std::string path;
    bool composed = false; // true when exposed from a function call or operator expression
};

// ---------------------------------------------------------------------------
// Vocabulary tables

inline const std::map<std::string, std::set<std::string>>& activity_type_vocabulary() {
    static const std::map<std::string, std::set<std::string>> vocab = {
        {"issues",
         {"opened", "edited", "deleted", "transferred", "pinned", "unpinned",
          "closed", "reopened", "assigned", "unassigned", "labeled", "unlabeled",
          "locked", "unlocked", "milestoned", "demilestoned"}},
        {"pull_request",
         {"assigned", "unassigned", "labeled", "unlabeled", "opened", "edited",
          "closed", "reopened", "synchronize", "converted_to_draft",
          "ready_for_review", "locked", "unlocked", "review_requested",
          "review_request_removed", "auto_merge_enabled", "auto_merge_disabled"}},
        {"pull_request_target",
         {"assigned", "unassigned", "labeled", "unlabeled", "opened", "edited",
          "closed", "reopened", "synchronize", "converted_to_draft",
          "ready_for_review", "locked", "unlocked", "review_requested",
          "review_request_removed", "auto_merge_enabled", "auto_merge_disabled"}},
        {"issue_comment", {"created", "edited", "deleted"}},
        {"pull_request_review", {"submitted", "edited", "dismissed"}},
        {"pull_request_review_comment", {"created", "edited", "deleted"}},
        {"release",
         {"published", "unpublished", "created", "edited", "deleted",
          "prereleased", "released"}},
        {"discussion",
         {"created", "edited", "deleted", "transferred", "pinned", "unpinned",
          "labeled", "unlabeled", "locked", "unlocked", "category_changed",
          "answered", "unanswered"}},
        {"discussion_comment", {"created", "edited", "deleted"}},
        {"workflow_run", {"completed", "requested", "in_progress"}},
        {"check_run", {"created", "rerequested", "completed", "requested_action"}},
        {"check_suite", {"completed"}},
        {"label", {"created", "edited", "deleted"}},
        {"milestone", {"created", "closed", "opened", "edited", "deleted"}},
        {"project", {"created", "closed", "reopened", "edited", "deleted"}},
        {"registry_package", {"published", "updated"}},
        {"watch", {"started"}},
        {"repository_dispatch", {}},
        {"merge_group", {"checks_requested"}},
        {"branch_protection_rule", {"created", "edited", "deleted"}},
    };
    return vocab;
}

inline const std::set<std::string>& permission_scope_vocabulary() {
    static const std::set<std::string> scopes = {
        "actions",        "attestations", "checks",     "contents",
        "deployments",    "discussions",  "id-token",   "issues",
        "models",         "packages",     "pages",      "pull-requests",
        "repository-projects", "security-events", "statuses",
    };
    return scopes;
}

// Context roots that can appear at the head of a dotted expression path.
inline const std::set<std::string>& known_context_roots() {
    static const std::set<std::string> roots = {
        "github", "secrets", "env",    "vars",     "inputs", "needs",
        "steps",  "jobs",    "job",    "runner",   "matrix", "strategy",
    };
    return roots;
}

// ---------------------------------------------------------------------------
// Path normalization

namespace detail {

inline std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline std::string_view trim_view(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

// Parses a bare dotted context path, possibly with `[0]` / `['key']` accesses.
// Consumes the whole input or fails.
inline std::optional<std::string> parse_bare_path(std::string_view s) {
    s = trim_view(s);
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_'))
        return std::nullopt;

    std::vector<std::string> segments;
    size_t i = 0;
    auto read_ident = [&]() -> std::optional<std::string> {
        size_t start = i;
        while (i < s.size() && is_ident_char(s[i])) ++i;
        if (i == start) return std::nullopt;
        return std::string(s.substr(start, i - start));
    };

    auto first = read_ident();
    if (!first) return std::nullopt;
    segments.push_back(*first);

    while (i < s.size()) {
        if (s[i] == '.') {
            ++i;
            if (i < s.size() && s[i] == '*') { // `.*` object filter
                ++i;
                segments.push_back("*");
                continue;
            }
            auto seg = read_ident();
            if (!seg) return std::nullopt;
            segments.push_back(*seg);
        } else if (s[i] == '[') {
            size_t close = s.find(']', i);
            if (close == std::string_view::npos) return std::nullopt;
            std::string_view inner = trim_view(s.substr(i + 1, close - i - 1));
            i = close + 1;
            if (!inner.empty() && (inner.front() == '\'' || inner.front() == '"')) {
                if (inner.size() < 2 || inner.back() != inner.front()) return std::nullopt;
                segments.push_back(std::string(inner.substr(1, inner.size() - 2)));
            } else {
                // numeric (or wildcard) index: wildcarded so one table entry
                // covers every element of the array
                segments.push_back("[*]");
            }
        } else {
            return std::nullopt;
        }
    }

    std::string root = to_lower(segments.front());
    if (!known_context_roots().count(root)) return std::nullopt;

    // Fields of the platform-owned contexts are canonically lowercase; member
    // names under `secrets`/`env`/`vars`/`inputs` keep their case.
    const bool lower_members =
        root == "github" || root == "runner" || root == "job" || root == "strategy";

    std::string out = root;
    for (size_t k = 1; k < segments.size(); ++k) {
        const std::string& seg = segments[k];
        if (seg == "[*]") {
            out += "[*]";
        } else {
            out += '.';
            out += lower_members ? to_lower(seg) : seg;
        }
    }
    return out;
}

// Splits `args` on top-level commas (respecting quotes and parentheses).
inline std::vector<std::string_view> split_call_args(std::string_view args) {
    std::vector<std::string_view> out;
    int depth = 0;
    char quote = 0;
    size_t start = 0;
    for (size_t i = 0; i < args.size(); ++i) {
        char c = args[i];
        if (quote) {
            if (c == quote) quote = 0;
        } else if (c == '\'' || c == '"') {
            quote = c;
        } else if (c == '(') {
            ++depth;
        } else if (c == ')') {
            --depth;
        } else if (c == ',' && depth == 0) {
            out.push_back(args.substr(start, i - start));
            start = i + 1;
        }
    }
    out.push_back(args.substr(start));
    return out;
}

} // namespace detail

// Normalizes the interior of one `${{ ... }}` template to a dotted context
// path. Function wrappers are unwrapped to their first context argument and
// operator expressions to their first context operand, both marked composed.
// Pure literals and calls without a context argument yield nullopt.
inline std::optional<NormalizedPath> normalize_context_path(std::string_view raw_expression) {
    using namespace detail;
    std::string_view expr = trim_view(raw_expression);
    if (expr.empty()) return std::nullopt;

    if (auto bare = parse_bare_path(expr))
        return NormalizedPath{*bare, false};

    // fn(arg, ...) — expose the first argument that carries a context path
    if (expr.back() == ')') {
        size_t open = expr.find('(');
        if (open != std::string_view::npos) {
            std::string_view head = trim_view(expr.substr(0, open));
            bool head_ok = !head.empty() &&
                           std::all_of(head.begin(), head.end(), [](char c) {
                               return is_ident_char(c) || c == '.';
                           });
            if (head_ok) {
                std::string_view args = expr.substr(open + 1, expr.size() - open - 2);
                for (auto arg : split_call_args(args)) {
                    if (auto inner = normalize_context_path(arg))
                        return NormalizedPath{inner->path, true};
                }
                return std::nullopt;
            }
        }
    }

    // Operator expression (==, &&, !, ...): expose the first context operand.
    {
        char quote = 0;
        for (size_t i = 0; i < expr.size(); ++i) {
            char c = expr[i];
            if (quote) {
                if (c == quote) quote = 0;
                continue;
            }
            if (c == '\'' || c == '"') {
                quote = c;
                continue;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                size_t j = i;
                while (j < expr.size() &&
                       (is_ident_char(expr[j]) || expr[j] == '.' || expr[j] == '[' ||
                        expr[j] == ']' || expr[j] == '\'' || expr[j] == '"' ||
                        expr[j] == '*'))
                    ++j;
                if (auto p = parse_bare_path(expr.substr(i, j - i)))
                    return NormalizedPath{*p, true};
                i = j;
            }
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Template scanning

struct TemplateSpan {
    size_t column = 0; // 0-based offset of `${{` within the line
    std::string raw;   // `${{ ... }}` or the unterminated tail
    bool terminated = true;
};

// Finds every `${{ ... }}` template in one line of text. Templates do not
// span lines; an opener without a closer on the same line is reported as
// unterminated.
inline std::vector<TemplateSpan> scan_templates(std::string_view line) {
    std::vector<TemplateSpan> out;
    size_t pos = 0;
    while (true) {
        size_t open = line.find("${{", pos);
        if (open == std::string_view::npos) break;
        size_t close = line.find("}}", open + 3);
        if (close == std::string_view::npos) {
            out.push_back({open, std::string(line.substr(open)), false});
            break;
        }
        out.push_back({open, std::string(line.substr(open, close + 2 - open)), true});
        pos = close + 2;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    size_t start = 0;
    while (start <= text.size()) {
        size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.emplace_back(text.substr(start));
            break;
        }
        std::string_view line = text.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.emplace_back(line);
        start = nl + 1;
    }
    return lines;
}

// YAML merge keys (`<<`) are not expanded by the parser; checks must see
// effective values, so expand them in place before modeling.
inline void expand_merge_keys(YAML::Node node) {
    if (node.IsMap()) {
        YAML::Node merge = node["<<"];
        if (merge) {
            std::vector<YAML::Node> sources;
            if (merge.IsMap()) {
                sources.push_back(merge);
            } else if (merge.IsSequence()) {
                for (auto s : merge)
                    if (s.IsMap()) sources.push_back(s);
            }
            for (auto& src : sources) {
                for (auto it : src) {
                    if (!it.first.IsScalar()) continue;
                    const std::string key = it.first.Scalar();
                    if (key == "<<") continue;
                    if (!node[key]) node[key] = it.second;
                }
            }
            node.remove("<<");
        }
        for (auto it : node) expand_merge_keys(it.second);
    } else if (node.IsSequence()) {
        for (auto it : node) expand_merge_keys(it);
    }
}

inline Scalar scalar_of(const YAML::Node& n) {
    Scalar s;
    if (n.IsScalar())
        s.text = n.Scalar();
    else
        s.text = YAML::Dump(n);
    s.line = n.Mark().line + 1;
    s.column = n.Mark().column + 1;
    return s;
}

inline int key_line(const YAML::Node& map, const std::string& key) {
    if (!map.IsMap()) return 0;
    for (auto it : map) {
        if (it.first.IsScalar() && it.first.Scalar() == key)
            return it.first.Mark().line + 1;
    }
    return 0;
}

inline std::vector<std::pair<std::string, Scalar>> read_env_map(const YAML::Node& n) {
    std::vector<std::pair<std::string, Scalar>> out;
    if (!n || !n.IsMap()) return out;
    for (auto it : n) {
        if (!it.first.IsScalar()) continue;
        out.emplace_back(it.first.Scalar(), scalar_of(it.second));
    }
    return out;
}

inline PermissionDecl parse_permissions(const YAML::Node& n, int key_line_no) {
    PermissionDecl decl;
    decl.line = key_line_no;
    if (n.IsScalar()) {
        const std::string v = to_lower(n.Scalar());
        if (v == "read-all")
            decl.mode = PermissionMode::ReadAll;
        else if (v == "write-all")
            decl.mode = PermissionMode::WriteAll;
        else {
            decl.mode = PermissionMode::Scoped;
            decl.unknown_scopes.push_back(n.Scalar());
        }
        return decl;
    }
    if (n.IsMap()) {
        if (n.size() == 0) {
            decl.mode = PermissionMode::None; // `permissions: {}` disables all
            return decl;
        }
        decl.mode = PermissionMode::Scoped;
        for (auto it : n) {
            if (!it.first.IsScalar()) continue;
            const std::string scope = it.first.Scalar();
            const std::string level = it.second.IsScalar() ? it.second.Scalar() : "";
            decl.scopes.emplace_back(scope, level);
            if (!permission_scope_vocabulary().count(to_lower(scope)))
                decl.unknown_scopes.push_back(scope);
        }
        return decl;
    }
    decl.mode = PermissionMode::None;
    return decl;
}

inline TriggerEvent make_trigger(const std::string& raw_name, const YAML::Node& cfg) {
    TriggerEvent ev;
    ev.event_name = to_lower(std::string(trim_view(raw_name)));

    if (cfg && cfg.IsMap()) {
        for (auto it : cfg) {
            if (!it.first.IsScalar()) continue;
            const std::string key = it.first.Scalar();
            const YAML::Node& val = it.second;
            if (key == "types") {
                if (val.IsSequence()) {
                    for (auto t : val)
                        if (t.IsScalar()) ev.activity_types.push_back(to_lower(t.Scalar()));
                } else if (val.IsScalar()) {
                    ev.activity_types.push_back(to_lower(val.Scalar()));
                }
            } else {
                std::vector<std::string> values;
                if (val.IsScalar()) {
                    values.push_back(val.Scalar());
                } else if (val.IsSequence()) {
                    for (auto x : val)
                        values.push_back(x.IsScalar() ? x.Scalar() : YAML::Dump(x));
                } else if (val.IsMap()) {
                    for (auto x : val)
                        if (x.first.IsScalar()) values.push_back(x.first.Scalar());
                }
                ev.filters.emplace_back(key, std::move(values));
            }
        }
    } else if (cfg && cfg.IsSequence()) {
        // `schedule:` carries a sequence of {cron: "..."} entries
        std::vector<std::string> values;
        for (auto item : cfg) {
            if (item.IsMap() && item["cron"] && item["cron"].IsScalar())
                values.push_back(item["cron"].Scalar());
            else if (item.IsScalar())
                values.push_back(item.Scalar());
        }
        ev.filters.emplace_back("cron", std::move(values));
    }

    auto vocab_it = activity_type_vocabulary().find(ev.event_name);
    if (vocab_it != activity_type_vocabulary().end()) {
        for (const auto& t : ev.activity_types)
            if (!vocab_it->second.count(t)) ev.unknown_activity_types.push_back(t);
    }
    return ev;
}

inline std::vector<TriggerEvent> parse_triggers(const YAML::Node& on) {
    std::vector<TriggerEvent> triggers;
    auto add = [&](TriggerEvent ev) {
        if (ev.event_name.empty()) return;
        for (const auto& existing : triggers)
            if (existing.event_name == ev.event_name) return;
        triggers.push_back(std::move(ev));
    };

    if (on.IsScalar()) {
        add(make_trigger(on.Scalar(), YAML::Node(YAML::NodeType::Undefined)));
    } else if (on.IsSequence()) {
        for (auto item : on)
            if (item.IsScalar())
                add(make_trigger(item.Scalar(), YAML::Node(YAML::NodeType::Undefined)));
    } else if (on.IsMap()) {
        for (auto it : on) {
            if (!it.first.IsScalar()) continue;
            add(make_trigger(it.first.Scalar(), it.second));
        }
    }
    return triggers;
}

inline StepModel parse_step(const YAML::Node& node, int index,
                            const std::string& job_id) {
    StepModel step;
    step.index = index;
    step.line = node.Mark().line + 1;
    if (!node.IsMap())
        throw WorkflowParseError(ParseErrorKind::NotAWorkflow,
                                 "step " + std::to_string(index) + " of job '" +
                                     job_id + "' is not a mapping");

    if (auto n = node["name"]; n && n.IsScalar()) step.display_name = n.Scalar();
    if (auto n = node["run"]) step.run_script = scalar_of(n);
    if (auto n = node["uses"]; n && n.IsScalar()) {
        step.uses = ActionRef::parse(n.Scalar());
        step.uses_line = n.Mark().line + 1;
    }
    if (step.run_script && step.uses)
        throw WorkflowParseError(ParseErrorKind::NotAWorkflow,
                                 "step " + std::to_string(index) + " of job '" +
                                     job_id + "' has both `run` and `uses`");
    step.env = read_env_map(node["env"]);
    step.with_inputs = read_env_map(node["with"]);
    if (auto n = node["if"]) step.conditional = scalar_of(n);
    return step;
}

inline JobModel parse_job(const std::string& job_id, const YAML::Node& node) {
    JobModel job;
    job.job_id = job_id;
    job.line = node.Mark().line + 1;
    if (!node.IsMap())
        throw WorkflowParseError(ParseErrorKind::NotAWorkflow,
                                 "job '" + job_id + "' is not a mapping");

    if (auto n = node["name"]; n && n.IsScalar()) job.display_name = n.Scalar();
    if (auto n = node["permissions"])
        job.permissions = parse_permissions(n, key_line(node, "permissions"));
    job.env = read_env_map(node["env"]);
    if (auto n = node["if"]) job.conditional = scalar_of(n);
    if (auto n = node["uses"]; n && n.IsScalar()) {
        job.reusable_workflow = ActionRef::parse(n.Scalar());
        job.uses_line = n.Mark().line + 1;
    }
    if (auto steps = node["steps"]) {
        if (!steps.IsSequence())
            throw WorkflowParseError(ParseErrorKind::NotAWorkflow,
                                     "job '" + job_id + "' has a non-sequence `steps`");
        int index = 1;
        for (auto s : steps) job.steps.push_back(parse_step(s, index++, job_id));
    }

    const bool has_steps = !job.steps.empty();
    const bool has_uses = job.reusable_workflow.has_value();
    if (has_steps == has_uses)
        throw WorkflowParseError(ParseErrorKind::NotAWorkflow,
                                 "job '" + job_id +
                                     "' must have either steps or a reusable workflow");
    return job;
}

} // namespace detail

inline ActionRef ActionRef::parse(const std::string& uses) {
    ActionRef ref;
    ref.spec_text = uses;

    if (uses.rfind("docker://", 0) == 0) {
        ref.kind = RefKind::DockerImage;
        ref.ref = uses.substr(9);
        return ref;
    }
    if (uses.rfind("./", 0) == 0 || uses.rfind("../", 0) == 0 || uses == ".") {
        ref.kind = RefKind::LocalPath;
        ref.ref = uses;
        return ref;
    }

    std::string spec = uses;
    std::string version;
    if (size_t at = uses.rfind('@'); at != std::string::npos) {
        spec = uses.substr(0, at);
        version = uses.substr(at + 1);
    }

    size_t slash = spec.find('/');
    if (slash == std::string::npos || slash == 0 || slash + 1 == spec.size()) {
        // not an owner/repo reference; treat like a local path and skip it
        ref.kind = RefKind::LocalPath;
        ref.ref = uses;
        return ref;
    }
    ref.owner = spec.substr(0, slash);
    std::string rest = spec.substr(slash + 1);
    if (size_t sub = rest.find('/'); sub != std::string::npos) {
        ref.repo = rest.substr(0, sub);
        ref.subpath = rest.substr(sub + 1);
    } else {
        ref.repo = rest;
    }

    auto is_full_sha = [](const std::string& s) {
        if (s.size() != 40) return false;
        return std::all_of(s.begin(), s.end(), [](char c) {
            return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
        });
    };
    auto looks_like_version = [](const std::string& s) {
        size_t i = (s.size() > 1 && (s[0] == 'v' || s[0] == 'V')) ? 1 : 0;
        if (i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        for (; i < s.size(); ++i) {
            char c = s[i];
            if (!std::isdigit(static_cast<unsigned char>(c)) && c != '.' && c != '-' &&
                !std::isalnum(static_cast<unsigned char>(c)))
                return false;
        }
        return true;
    };

    if (version.empty()) {
        ref.kind = RefKind::Branch;
        ref.ref = "HEAD";
    } else if (is_full_sha(version)) {
        ref.kind = RefKind::CommitSha;
        ref.ref = version;
    } else if (looks_like_version(version) || version == "latest") {
        ref.kind = RefKind::Tag;
        ref.ref = version;
    } else {
        ref.kind = RefKind::Branch;
        ref.ref = version;
    }
    return ref;
}

// Parses one workflow file into its semantic model. YAML anchors and aliases
// are resolved, merge keys expanded, and the `on:` clause normalized whether
// written as scalar, list, or mapping (including the YAML 1.1 boolean
// rendering of the `on` key).
inline WorkflowModel parse_workflow(const std::string& source,
                                    const std::string& source_path) {
    std::vector<YAML::Node> docs;
    try {
        docs = YAML::LoadAll(source);
    } catch (const YAML::Exception& e) {
        throw WorkflowParseError(ParseErrorKind::MalformedYaml, e.what());
    }

    // drop trailing empty documents some emitters append
    while (!docs.empty() && docs.back().IsNull()) docs.pop_back();
    if (docs.empty())
        throw WorkflowParseError(ParseErrorKind::NotAWorkflow, "empty document");
    if (docs.size() > 1)
        throw WorkflowParseError(ParseErrorKind::NotAWorkflow,
                                 "multi-document files are not workflows");

    YAML::Node doc = docs.front();
    if (!doc.IsMap())
        throw WorkflowParseError(ParseErrorKind::NotAWorkflow,
                                 "top level is not a mapping");

    detail::expand_merge_keys(doc);

    YAML::Node on = doc["on"];
    if (!on) on = doc["true"]; // `on` read under YAML 1.1 boolean rules
    if (!on)
        throw WorkflowParseError(ParseErrorKind::NotAWorkflow, "no `on` clause");
    YAML::Node jobs = doc["jobs"];
    if (!jobs)
        throw WorkflowParseError(ParseErrorKind::NotAWorkflow, "no `jobs` mapping");
    if (!jobs.IsMap())
        throw WorkflowParseError(ParseErrorKind::NotAWorkflow,
                                 "`jobs` is not a mapping");
    if (jobs.size() == 0)
        throw WorkflowParseError(ParseErrorKind::EmptyJobs, "`jobs` mapping is empty");

    WorkflowModel model;
    model.source_path = source_path;
    model.raw_lines = detail::split_lines(source);

    if (auto n = doc["name"]; n && n.IsScalar()) model.name = n.Scalar();
    model.triggers = detail::parse_triggers(on);
    if (model.triggers.empty())
        throw WorkflowParseError(ParseErrorKind::NotAWorkflow,
                                 "no trigger events in `on` clause");
    if (auto n = doc["permissions"])
        model.permissions = detail::parse_permissions(n, detail::key_line(doc, "permissions"));
    model.env = detail::read_env_map(doc["env"]);

    for (auto it : jobs) {
        if (!it.first.IsScalar())
            throw WorkflowParseError(ParseErrorKind::NotAWorkflow,
                                     "non-scalar job id");
        model.jobs.push_back(detail::parse_job(it.first.Scalar(), it.second));
    }
    return model;
}

// ---------------------------------------------------------------------------
// Expression extraction

namespace detail {

struct Locator {
    const std::vector<std::string>& lines;
    size_t line_idx; // 0-based
    size_t col;

    // Finds `needle` at or after the cursor and advances past it.
    // Returns 1-based (line, column) or nullopt.
    std::optional<std::pair<int, int>> next(const std::string& needle) {
        for (size_t li = line_idx; li < lines.size(); ++li) {
            size_t from = (li == line_idx) ? col : 0;
            size_t pos = lines[li].find(needle, from);
            if (pos != std::string::npos) {
                line_idx = li;
                col = pos + needle.size();
                return std::make_pair(static_cast<int>(li + 1),
                                      static_cast<int>(pos + 1));
            }
        }
        return std::nullopt;
    }
};

// Adjacency within the value line: a template concatenated with other
// non-whitespace content (including another template) is composed.
inline bool adjacent_content(std::string_view line, size_t start, size_t end) {
    if (start > 0 && !std::isspace(static_cast<unsigned char>(line[start - 1])))
        return true;
    if (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end])))
        return true;
    return false;
}

struct ExtractState {
    const WorkflowModel& model;
    std::vector<ExpressionOccurrence> out;
    std::set<std::pair<int, int>> claimed; // located (line, column)

    void scan_value(const Scalar& value, ExprSite site, const std::string& job_id,
                    int step_index) {
        Locator cursor{model.raw_lines,
                       value.line > 0 ? static_cast<size_t>(value.line - 1) : 0,
                       value.column > 0 ? static_cast<size_t>(value.column - 1) : 0};

        size_t start = 0;
        while (start <= value.text.size()) {
            size_t nl = value.text.find('\n', start);
            std::string_view value_line(value.text.data() + start,
                                        (nl == std::string::npos ? value.text.size() : nl) - start);
            for (const auto& span : scan_templates(value_line)) {
                ExpressionOccurrence occ;
                occ.raw = span.raw;
                occ.site = span.terminated ? site : ExprSite::Other;
                occ.malformed = !span.terminated;
                occ.job_id = job_id;
                occ.step_index = step_index;
                occ.composed =
                    adjacent_content(value_line, span.column, span.column + span.raw.size());
                if (span.terminated) {
                    std::string_view interior(span.raw);
                    interior.remove_prefix(3);
                    interior.remove_suffix(2);
                    if (auto norm = normalize_context_path(interior)) {
                        occ.path = norm->path;
                        occ.has_path = true;
                        occ.composed = occ.composed || norm->composed;
                    }
                }
                if (auto loc = cursor.next(span.raw)) {
                    occ.line = loc->first;
                    occ.column = loc->second;
                    claimed.insert(*loc);
                } else {
                    // value not verbatim in the source (escaped/folded scalar);
                    // fall back to the node position
                    occ.line = value.line;
                    occ.column = value.column;
                }
                out.push_back(std::move(occ));
            }
            if (nl == std::string::npos) break;
            start = nl + 1;
        }
    }

    void scan_env(const std::vector<std::pair<std::string, Scalar>>& env,
                  const std::string& job_id, int step_index) {
        for (const auto& [key, value] : env)
            scan_value(value, ExprSite::EnvValue, job_id, step_index);
    }

    // Templates outside the modeled fields (names, run-on images, comments)
    // still count as occurrences; they carry site Other and no attribution.
    void sweep_unclaimed() {
        for (size_t li = 0; li < model.raw_lines.size(); ++li) {
            for (const auto& span : scan_templates(model.raw_lines[li])) {
                auto key = std::make_pair(static_cast<int>(li + 1),
                                          static_cast<int>(span.column + 1));
                if (claimed.count(key)) continue;
                ExpressionOccurrence occ;
                occ.raw = span.raw;
                occ.site = ExprSite::Other;
                occ.malformed = !span.terminated;
                occ.line = key.first;
                occ.column = key.second;
                occ.composed = adjacent_content(model.raw_lines[li], span.column,
                                                span.column + span.raw.size());
                if (span.terminated) {
                    std::string_view interior(span.raw);
                    interior.remove_prefix(3);
                    interior.remove_suffix(2);
                    if (auto norm = normalize_context_path(interior)) {
                        occ.path = norm->path;
                        occ.has_path = true;
                        occ.composed = occ.composed || norm->composed;
                    }
                }
                out.push_back(std::move(occ));
            }
        }
    }
};

} // namespace detail

// Extracts every template occurrence from run scripts, env values, action
// inputs, and conditionals, ordered by (job, step, line, column).
inline std::vector<ExpressionOccurrence> extract_expressions(const WorkflowModel& model) {
    detail::ExtractState state{model, {}, {}};

    state.scan_env(model.env, "", 0);
    for (const auto& job : model.jobs) {
        state.scan_env(job.env, job.job_id, 0);
        if (job.conditional)
            state.scan_value(*job.conditional, ExprSite::Conditional, job.job_id, 0);
        for (const auto& step : job.steps) {
            if (step.run_script)
                state.scan_value(*step.run_script, ExprSite::RunScript, job.job_id,
                                 step.index);
            state.scan_env(step.env, job.job_id, step.index);
            for (const auto& [key, value] : step.with_inputs)
                state.scan_value(value, ExprSite::WithInput, job.job_id, step.index);
            if (step.conditional)
                state.scan_value(*step.conditional, ExprSite::Conditional, job.job_id,
                                 step.index);
        }
    }
    state.sweep_unclaimed();

    std::map<std::string, int> job_pos;
    for (size_t i = 0; i < model.jobs.size(); ++i)
        job_pos[model.jobs[i].job_id] = static_cast<int>(i);
    auto rank = [&](const ExpressionOccurrence& o) {
        auto it = job_pos.find(o.job_id);
        int jp = (o.job_id.empty() || it == job_pos.end()) ? -1 : it->second;
        return std::make_tuple(jp, o.step_index, o.line, o.column);
    };
    std::stable_sort(state.out.begin(), state.out.end(),
                     [&](const auto& a, const auto& b) { return rank(a) < rank(b); });
    return state.out;
}

} // namespace wfaudit
