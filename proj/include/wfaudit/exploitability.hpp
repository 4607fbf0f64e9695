#pragma once

// Three-level exploitability classification of trigger events: how freely an
// external account can fire the event that starts a workflow run.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include <yaml-cpp/yaml.h>

#include "wfaudit/workflow_model.hpp"

namespace wfaudit {

enum class ExploitabilityLabel { Restricted = 1, Supervised = 2, Unsupervised = 3 };

inline ExploitabilityLabel label_for_level(int level) {
    switch (level) {
        case 1: return ExploitabilityLabel::Restricted;
        case 2: return ExploitabilityLabel::Supervised;
        case 3: return ExploitabilityLabel::Unsupervised;
        default: throw std::invalid_argument("exploitability level must be 1, 2, or 3");
    }
}

inline const char* label_name(ExploitabilityLabel label) {
    switch (label) {
        case ExploitabilityLabel::Restricted: return "Restricted";
        case ExploitabilityLabel::Supervised: return "Supervised";
        case ExploitabilityLabel::Unsupervised: return "Unsupervised";
    }
    return "Supervised";
}

struct ExploitabilityScore {
    int level = 2;
    ExploitabilityLabel label = ExploitabilityLabel::Supervised;
    std::string rationale;

    static ExploitabilityScore make(int level, std::string rationale) {
        return {level, label_for_level(level), std::move(rationale)};
    }
};

// Base score per event name plus per-activity overrides. Lookups never fail:
// events absent from the table score `default_for_unknown`.
struct EventScoreTable {
    std::map<std::string, ExploitabilityScore> base;
    std::map<std::pair<std::string, std::string>, ExploitabilityScore> activity_overrides;
    ExploitabilityScore default_for_unknown =
        ExploitabilityScore::make(2, "unknown event");

    ExploitabilityScore lookup(const std::string& event_name) const {
        auto it = base.find(event_name);
        return it != base.end() ? it->second : default_for_unknown;
    }
};

// The shipped classification. Rule applied uniformly:
//   3 Unsupervised — any unprivileged account can fire the event by external
//     action (opening an issue, commenting, forking, starring).
//   2 Supervised   — firing requires maintainer mediation or particular
//     conditions (accepting a pull request, reviewing).
//   1 Restricted   — firing requires write access or a repository-content
//     change (pushing, tagging, committing a cron entry).
inline EventScoreTable default_score_table() {
    EventScoreTable t;
    auto set = [&](const char* name, int level, const char* why) {
        t.base[name] = ExploitabilityScore::make(level, why);
    };

    set("issues", 3, "any account can open or edit an issue");
    set("issue_comment", 3, "any account can comment on issues and pull requests");
    set("discussion", 3, "any account can open a discussion");
    set("discussion_comment", 3, "any account can comment on a discussion");
    set("fork", 3, "any account can fork a public repository");
    set("watch", 3, "any account can star a repository");
    set("pull_request_target", 3,
        "fork pull requests run in the target repository context without approval");

    set("pull_request", 2,
        "anyone can open a pull request but a maintainer must accept it to run the workflow");
    set("pull_request_review", 2, "a review presupposes a maintainer-handled pull request");
    set("pull_request_review_comment", 2,
        "review comments presuppose a maintainer-handled pull request");
    set("workflow_run", 2, "fires only after another workflow run completes");
    set("gollum", 2, "wiki edits default to collaborators; public editing is opt-in");

    set("push", 1, "pushing requires write access to the repository");
    set("create", 1, "creating branches or tags requires write access");
    set("delete", 1, "deleting branches or tags requires write access");
    set("release", 1, "publishing a release requires write access");
    set("schedule", 1, "the cron entry can only be set by a committed workflow change");
    set("workflow_dispatch", 1, "manual dispatch requires write access to the repository");
    set("workflow_call", 1, "callable only from workflows that already run in the repository");
    set("repository_dispatch", 1, "dispatch requires a token with repository access");
    set("registry_package", 1, "publishing a package requires write access");
    set("deployment", 1, "creating a deployment requires write access");
    set("deployment_status", 1, "deployment statuses are set by deployment integrations");
    set("page_build", 1, "pages builds follow pushes to the pages branch");
    set("public", 1, "making a repository public requires admin access");
    set("status", 1, "commit statuses are set by integrations with write access");
    set("check_run", 1, "check runs are created by integrations with write access");
    set("check_suite", 1, "check suites are created by integrations with write access");
    set("label", 1, "managing labels requires write access");
    set("milestone", 1, "managing milestones requires write access");
    set("project", 1, "managing projects requires write access");
    set("project_card", 1, "managing project cards requires write access");
    set("project_column", 1, "managing project columns requires write access");
    set("branch_protection_rule", 1, "branch protection is admin-only");
    set("merge_group", 1, "merge queues are populated by maintainers");

    auto override_with = [&](const char* event, const char* activity, int level,
                             const char* why) {
        t.activity_overrides[{event, activity}] = ExploitabilityScore::make(level, why);
    };
    override_with("issues", "assigned", 2, "issue assignment is performed by collaborators");
    override_with("issues", "labeled", 2, "labeling an issue requires triage permission");
    override_with("issues", "milestoned", 2, "milestoning an issue requires triage permission");
    override_with("discussion", "answered", 2,
                  "marking a discussion answered requires maintainer action");
    return t;
}

// Scores one trigger event. Activity-type filters restrict who can fire the
// event, so they can only lower the score: when every declared activity type
// has an override the attacker picks the easiest of them (maximum), capped at
// the base score; otherwise the base score stands.
inline ExploitabilityScore score_event(const TriggerEvent& event,
                                       const EventScoreTable& table) {
    ExploitabilityScore base = table.lookup(event.event_name);
    if (event.activity_types.empty()) return base;

    bool all_overridden = true;
    std::optional<ExploitabilityScore> best;
    for (const auto& activity : event.activity_types) {
        auto it = table.activity_overrides.find({event.event_name, activity});
        if (it == table.activity_overrides.end()) {
            all_overridden = false;
            break;
        }
        if (!best || it->second.level > best->level) best = it->second;
    }
    if (!all_overridden || !best) return base;
    if (best->level >= base.level) return base;
    return *best;
}

// Merges an override file over `base`. The file maps event names (and
// `event/activity` pairs) to 1|2|3:
//
//   issues: 2
//   issues/assigned: 1
inline EventScoreTable load_score_table_overrides(const std::string& yaml_text,
                                                  EventScoreTable table) {
    YAML::Node doc;
    try {
        doc = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw std::runtime_error(std::string("malformed score table override: ") + e.what());
    }
    if (doc.IsNull()) return table;
    if (!doc.IsMap())
        throw std::runtime_error("malformed score table override: expected a mapping");

    for (auto it : doc) {
        if (!it.first.IsScalar() || !it.second.IsScalar())
            throw std::runtime_error("malformed score table override: expected scalar entries");
        const std::string key = detail::to_lower(it.first.Scalar());
        int level = 0;
        try {
            level = it.second.as<int>();
        } catch (const YAML::Exception&) {
            throw std::runtime_error("malformed score table override: level for '" + key +
                                     "' is not a number");
        }
        if (level < 1 || level > 3)
            throw std::runtime_error("malformed score table override: level for '" + key +
                                     "' must be 1, 2, or 3");
        auto score = ExploitabilityScore::make(level, "override");
        if (size_t slash = key.find('/'); slash != std::string::npos) {
            table.activity_overrides[{key.substr(0, slash), key.substr(slash + 1)}] = score;
        } else {
            table.base[key] = score;
        }
    }
    return table;
}

} // namespace wfaudit
