#pragma once

// Security checks over a workflow model: secrets handling, script injection
// through externally writable context fields, third-party action versioning,
// and token-permission placement.

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "wfaudit/exploitability.hpp"
#include "wfaudit/workflow_model.hpp"

namespace wfaudit {

enum class IssueKind { Vulnerability, Misconfiguration };

inline IssueKind kind_for_code(const std::string& code) {
    if (code.rfind("CI_", 0) == 0 || code.rfind("SECRET_", 0) == 0)
        return IssueKind::Vulnerability;
    return IssueKind::Misconfiguration;
}

struct IssueType {
    std::string code;
    IssueKind kind = IssueKind::Misconfiguration;

    static IssueType of(std::string code) {
        IssueKind k = kind_for_code(code);
        return {std::move(code), k};
    }
};

inline const char* issue_kind_name(IssueKind kind) {
    return kind == IssueKind::Vulnerability ? "vulnerability" : "misconfiguration";
}

enum class Conditionality { Unconditional, Conditional, NotApplicable };

inline const char* conditionality_name(Conditionality c) {
    switch (c) {
        case Conditionality::Unconditional: return "unconditional";
        case Conditionality::Conditional: return "conditional";
        case Conditionality::NotApplicable: return "not_applicable";
    }
    return "not_applicable";
}

struct IssueLine {
    int number = 0;   // 1-based; the line the issue points at
    std::string text; // the exact raw line from the source file
};

struct Finding {
    IssueType issue;
    std::string triggering_event; // filled by run_all_checks, one per trigger
    std::string job_name;
    std::string step_name;
    int step_position = 0; // 1-based; 0 for workflow-level findings
    IssueLine issue_line;
    ExploitabilityScore exploitability; // filled alongside triggering_event
    Conditionality conditionality = Conditionality::NotApplicable;
    bool indeterminate = false; // version resolution unavailable
    std::string note;
};

enum class Controllability { AttackerControlled, MaintainerControlled, PlatformControlled };

struct ControllabilityEntry {
    std::string tag; // CI_<PATH_TAG> for attacker-controlled paths
    Controllability cls = Controllability::PlatformControlled;
};

struct ControllabilityTable {
    std::map<std::string, ControllabilityEntry> entries;

    const ControllabilityEntry* lookup(const std::string& path) const {
        auto it = entries.find(path);
        return it != entries.end() ? &it->second : nullptr;
    }
};

// Externally writable fields of the event context, each with the issue tag
// its interpolation into a run script produces. The table is data so the set
// can evolve (and be overridden from a file) without code changes.
inline ControllabilityTable default_controllability_table() {
    ControllabilityTable t;
    auto attacker = [&](const char* path, const char* tag) {
        t.entries[path] = {tag, Controllability::AttackerControlled};
    };
    auto platform = [&](const char* path) {
        t.entries[path] = {"", Controllability::PlatformControlled};
    };
    auto maintainer = [&](const char* path) {
        t.entries[path] = {"", Controllability::MaintainerControlled};
    };

    attacker("github.event.issue.title", "CI_ISSUE_TITLE");
    attacker("github.event.issue.body", "CI_ISSUE_BODY");
    attacker("github.event.pull_request.title", "CI_PR_TITLE");
    attacker("github.event.pull_request.body", "CI_PR_BODY");
    attacker("github.event.comment.body", "CI_COMMENT_BODY");
    attacker("github.event.review.body", "CI_REVIEW_BODY");
    attacker("github.event.review_comment.body", "CI_REVIEW_COMMENT_BODY");
    attacker("github.event.discussion.title", "CI_DISCUSSION_TITLE");
    attacker("github.event.discussion.body", "CI_DISCUSSION_BODY");
    attacker("github.event.pages[*].page_name", "CI_PAGE_NAME");
    attacker("github.event.commits[*].message", "CI_COMMIT_MESSAGE");
    attacker("github.event.commits[*].author.name", "CI_COMMIT_AUTHOR_NAME");
    attacker("github.event.commits[*].author.email", "CI_COMMIT_AUTHOR_EMAIL");
    attacker("github.event.head_commit.message", "CI_HEAD_COMMIT_MESSAGE");
    attacker("github.event.head_commit.author.name", "CI_HEAD_COMMIT_AUTHOR_NAME");
    attacker("github.event.head_commit.author.email", "CI_HEAD_COMMIT_AUTHOR_EMAIL");
    attacker("github.event.pull_request.head.ref", "CI_PR_HEAD_REF");
    attacker("github.event.pull_request.head.label", "CI_PR_HEAD_LABEL");
    attacker("github.event.pull_request.head.repo.name", "CI_PR_HEAD_REPO_NAME");
    attacker("github.event.pull_request.head.repo.description", "CI_PR_HEAD_REPO_DESCRIPTION");
    attacker("github.head_ref", "CI_HEAD_REF");
    attacker("github.actor", "CI_ACTOR");
    attacker("github.triggering_actor", "CI_TRIGGERING_ACTOR");

    platform("github.sha");
    platform("github.ref");
    platform("github.ref_name");
    platform("github.repository");
    platform("github.repository_owner");
    platform("github.run_id");
    platform("github.run_number");
    platform("github.workspace");
    platform("github.event_name");
    platform("github.token");
    platform("github.event.pull_request.head.sha");
    platform("github.event.pull_request.number");
    platform("github.event.issue.number");
    maintainer("github.event.repository.name");
    maintainer("github.event.repository.description");
    maintainer("github.event.label.name");
    maintainer("github.event.milestone.title");
    return t;
}

// Override file: mapping of normalized path to either a tag string (implies
// attacker-controlled) or `{tag: ..., class: attacker|maintainer|platform}`.
inline ControllabilityTable load_controllability_overrides(const std::string& yaml_text,
                                                           ControllabilityTable table) {
    YAML::Node doc;
    try {
        doc = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw std::runtime_error(std::string("malformed controllability table override: ") +
                                 e.what());
    }
    if (doc.IsNull()) return table;
    if (!doc.IsMap())
        throw std::runtime_error("malformed controllability table override: expected a mapping");

    for (auto it : doc) {
        if (!it.first.IsScalar())
            throw std::runtime_error("malformed controllability table override: non-scalar path");
        const std::string path = detail::to_lower(it.first.Scalar());
        ControllabilityEntry entry;
        if (it.second.IsScalar()) {
            entry.tag = it.second.Scalar();
            entry.cls = Controllability::AttackerControlled;
        } else if (it.second.IsMap()) {
            if (auto tag = it.second["tag"]; tag && tag.IsScalar()) entry.tag = tag.Scalar();
            std::string cls = "attacker";
            if (auto c = it.second["class"]; c && c.IsScalar())
                cls = detail::to_lower(c.Scalar());
            if (cls == "attacker")
                entry.cls = Controllability::AttackerControlled;
            else if (cls == "maintainer")
                entry.cls = Controllability::MaintainerControlled;
            else if (cls == "platform")
                entry.cls = Controllability::PlatformControlled;
            else
                throw std::runtime_error(
                    "malformed controllability table override: unknown class '" + cls + "'");
        } else {
            throw std::runtime_error(
                "malformed controllability table override: bad entry for '" + path + "'");
        }
        if (entry.cls == Controllability::AttackerControlled && entry.tag.empty())
            throw std::runtime_error(
                "malformed controllability table override: attacker path '" + path +
                "' needs a tag");
        table.entries[path] = std::move(entry);
    }
    return table;
}

// Latest-version lookups needed by the third-party checks. Implementations
// may be live, recorded, or in-memory test doubles; they must be safe for
// concurrent queries.
class ActionVersionResolver {
public:
    struct Latest {
        std::string tag;
        std::string commit_sha;
    };
    virtual ~ActionVersionResolver() = default;
    // nullopt means the question could not be answered (resolver degraded).
    virtual std::optional<Latest> latest_release(const std::string& repo_key) = 0;
    virtual std::optional<std::string> resolve(const std::string& repo_key,
                                               const ActionRef& ref) = 0;
};

// ---------------------------------------------------------------------------

namespace detail {

inline std::string step_label(const StepModel& step) {
    if (step.display_name) return *step.display_name;
    return "step " + std::to_string(step.index);
}

inline std::string job_label(const JobModel& job) {
    return job.display_name ? *job.display_name : job.job_id;
}

inline IssueLine line_at(const WorkflowModel& model, int line_number) {
    return {line_number, model.line_text(line_number)};
}

inline Conditionality step_conditionality(const JobModel& job, const StepModel* step) {
    if ((step && step->conditional) || job.conditional) return Conditionality::Conditional;
    return Conditionality::Unconditional;
}

inline const StepModel* step_of(const JobModel& job, int index) {
    for (const auto& s : job.steps)
        if (s.index == index) return &s;
    return nullptr;
}

inline Finding occurrence_finding(const WorkflowModel& model, std::string code,
                                  const ExpressionOccurrence& occ) {
    Finding f;
    f.issue = IssueType::of(std::move(code));
    f.step_position = occ.step_index;
    f.issue_line = line_at(model, occ.line);
    f.job_name = occ.job_id;
    f.step_name = "-";
    if (const JobModel* job = model.find_job(occ.job_id)) {
        f.job_name = job_label(*job);
        const StepModel* step = step_of(*job, occ.step_index);
        if (step) f.step_name = step_label(*step);
        f.conditionality = step_conditionality(*job, step);
    } else {
        f.job_name = occ.job_id.empty() ? "-" : occ.job_id;
        f.conditionality = Conditionality::Unconditional;
    }
    return f;
}

} // namespace detail

// SC-1 / SC-2 — secrets placement and secret-derived values.
// A secret referenced anywhere but an env mapping or an action input can be
// exfiltrated by whatever runs in the step; a secret composed with other
// tokens produces derived confidential data that is no longer registered as
// a secret.
inline std::vector<Finding> check_secrets(const WorkflowModel& model,
                                          const std::vector<ExpressionOccurrence>& expressions) {
    std::vector<Finding> findings;
    for (const auto& occ : expressions) {
        if (!occ.has_path || occ.malformed) continue;
        if (occ.path.rfind("secrets.", 0) != 0 && occ.path != "secrets") continue;

        const bool sanctioned_site =
            occ.site == ExprSite::EnvValue || occ.site == ExprSite::WithInput;
        if (!sanctioned_site) {
            Finding f = detail::occurrence_finding(model, "SECRET_OUTSIDE_ENV", occ);
            f.note = occ.path;
            findings.push_back(std::move(f));
        }
        if (occ.composed) {
            Finding f = detail::occurrence_finding(model, "SECRET_DERIVED", occ);
            f.note = occ.path;
            findings.push_back(std::move(f));
        }
    }
    return findings;
}

// SC-3 — injection of externally writable context fields into run scripts.
// Values routed through env indirection reach the script as quoted shell
// variables instead of being spliced into its text, so EnvValue sites are
// not findings.
inline std::vector<Finding> check_injection(const WorkflowModel& model,
                                            const std::vector<ExpressionOccurrence>& expressions,
                                            const ControllabilityTable& table) {
    std::vector<Finding> findings;
    for (const auto& occ : expressions) {
        if (!occ.has_path || occ.malformed) continue;
        if (occ.site != ExprSite::RunScript) continue;
        const ControllabilityEntry* entry = table.lookup(occ.path);
        if (!entry || entry->cls != Controllability::AttackerControlled) continue;

        Finding f = detail::occurrence_finding(model, entry->tag, occ);
        f.note = occ.path;
        findings.push_back(std::move(f));
    }
    return findings;
}

// SC-4 / SC-5 — third-party action versioning. A ref that is not a 40-hex
// commit sha is open to tag-reuse (UNPINNED_WF); a ref that does not resolve
// to the commit of the latest release is stale (OUTDATED_WF). Both pass only
// for the commit hash of the latest version. Local paths and docker images
// are out of scope.
inline std::vector<Finding> check_third_party(const WorkflowModel& model,
                                              ActionVersionResolver* resolver) {
    std::vector<Finding> findings;

    auto evaluate = [&](const JobModel& job, const StepModel* step, const ActionRef& ref,
                        int uses_line) {
        if (!ref.is_remote()) return;

        Finding base;
        base.job_name = detail::job_label(job);
        base.step_name = step ? detail::step_label(*step) : "-";
        base.step_position = step ? step->index : 0;
        base.issue_line = detail::line_at(model, uses_line);
        base.conditionality = Conditionality::NotApplicable;
        base.note = ref.spec_text;

        if (!ref.is_pinned()) {
            Finding f = base;
            f.issue = IssueType::of("UNPINNED_WF");
            findings.push_back(std::move(f));
        }

        std::optional<ActionVersionResolver::Latest> latest;
        std::optional<std::string> resolved;
        if (resolver) {
            latest = resolver->latest_release(ref.repo_key());
            if (latest) resolved = resolver->resolve(ref.repo_key(), ref);
        }
        Finding f = base;
        f.issue = IssueType::of("OUTDATED_WF");
        if (!latest || !resolved) {
            f.indeterminate = true;
            f.note = ref.spec_text + ": latest version unavailable";
            findings.push_back(std::move(f));
        } else if (*resolved != latest->commit_sha) {
            f.note = ref.spec_text + " resolves to " + resolved->substr(0, 12) +
                     ", latest " + latest->tag + " is " + latest->commit_sha.substr(0, 12);
            findings.push_back(std::move(f));
        }
    };

    for (const auto& job : model.jobs) {
        if (job.reusable_workflow)
            evaluate(job, nullptr, *job.reusable_workflow, job.uses_line);
        for (const auto& step : job.steps)
            if (step.uses) evaluate(job, &step, *step.uses, step.uses_line);
    }
    return findings;
}

// SC-6 — least-privilege placement of token permissions. Nothing declared
// means the default token permissions apply; a workflow-level declaration
// that is not refined per job grants every job the same set.
inline std::vector<Finding> check_permissions(const WorkflowModel& model) {
    std::vector<Finding> findings;

    const JobModel* first_uncovered = nullptr;
    for (const auto& job : model.jobs) {
        if (!job.permissions) {
            first_uncovered = &job;
            break;
        }
    }
    if (!first_uncovered) return findings; // every job declares its own

    Finding f;
    f.step_position = 0;
    f.step_name = "-";
    f.conditionality = Conditionality::NotApplicable;
    if (model.permissions) {
        f.issue = IssueType::of("MISCONF_PERM_GLOBAL");
        f.job_name = first_uncovered->job_id;
        f.issue_line = detail::line_at(model, model.permissions->line);
    } else {
        f.issue = IssueType::of("MISCONF_PERM_DEFAULT");
        f.job_name = "-";
        f.issue_line = detail::line_at(model, 1);
    }
    findings.push_back(std::move(f));
    return findings;
}

// ---------------------------------------------------------------------------

// Runs every check and replicates each finding once per trigger event with
// that event's exploitability score attached. Output is ordered by
// (job, step, line, issue code, event).
inline std::vector<Finding> run_all_checks(const WorkflowModel& model,
                                           const ControllabilityTable& controllability,
                                           ActionVersionResolver* resolver,
                                           const EventScoreTable& scores) {
    const auto expressions = extract_expressions(model);

    std::vector<Finding> site_findings;
    auto append = [&](std::vector<Finding> fs) {
        std::move(fs.begin(), fs.end(), std::back_inserter(site_findings));
    };
    append(check_secrets(model, expressions));
    append(check_injection(model, expressions, controllability));
    append(check_third_party(model, resolver));
    append(check_permissions(model));

    std::map<std::string, int> job_pos;
    for (size_t i = 0; i < model.jobs.size(); ++i) {
        job_pos[model.jobs[i].job_id] = static_cast<int>(i);
        if (model.jobs[i].display_name) job_pos[*model.jobs[i].display_name] = static_cast<int>(i);
    }

    std::vector<Finding> out;
    out.reserve(site_findings.size() * model.triggers.size());
    for (size_t ti = 0; ti < model.triggers.size(); ++ti) {
        const auto& trigger = model.triggers[ti];
        const auto score = score_event(trigger, scores);
        for (const auto& f : site_findings) {
            Finding replicated = f;
            replicated.triggering_event = trigger.event_name;
            replicated.exploitability = score;
            out.push_back(std::move(replicated));
        }
    }

    std::map<std::string, int> event_pos;
    for (size_t i = 0; i < model.triggers.size(); ++i)
        event_pos[model.triggers[i].event_name] = static_cast<int>(i);
    auto rank = [&](const Finding& f) {
        auto jit = job_pos.find(f.job_name);
        int jp = jit != job_pos.end() ? jit->second : -1;
        auto eit = event_pos.find(f.triggering_event);
        int ep = eit != event_pos.end() ? eit->second : 0;
        return std::make_tuple(jp, f.step_position, f.issue_line.number, f.issue.code, ep);
    };
    std::stable_sort(out.begin(), out.end(),
                     [&](const Finding& a, const Finding& b) { return rank(a) < rank(b); });
    return out;
}

} // namespace wfaudit
