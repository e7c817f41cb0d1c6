#pragma once

#include <ctime>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rolegate/catalog/store.hpp"
#include "rolegate/permission.hpp"
#include "rolegate/sql/ast.hpp"

namespace rolegate::rbac {

// Role resolution, least-privilege activation and column admissibility.
//
// The ground truth for "what can this user touch right now" is always
// recomputable from scratch: the union of effective grants of the roles named
// by the user's live ActivationRecords. The delta / revoked permission sets
// returned by activate/deactivate are bookkeeping values derived from that
// truth, never a second source of it.

struct RoleSet {
    std::uint64_t user_id = 0;
    std::set<std::uint64_t> roles;
};

struct QueryContext {
    Action action = Action::select;
    std::string table;
    std::set<std::string> columns;

    static QueryContext of(const sql::ParsedQuery& q) {
        return QueryContext{q.kind, q.table, q.referenced_columns()};
    }
};

struct ActivationRecord {
    std::uint64_t user_id = 0;
    std::string transaction_id; // transaction that first created this record
    std::uint64_t activated_role = 0;
    PermissionSet granted_permissions; // delta reported at first activation
    std::uint32_t refcount = 0;
};

class AccessEngine {
public:
    explicit AccessEngine(catalog::Catalog& cat) : cat_(cat) {}

    AccessEngine(const AccessEngine&) = delete;
    AccessEngine& operator=(const AccessEngine&) = delete;

    /// Replaces the wall clock for time-window policies (tests pin the hour).
    void set_clock(std::function<int()> hour_fn) { hour_ = std::move(hour_fn); }

    /// Individual roles, plus group roles for every group of the user the
    /// supplied key unlocks. A key that unlocks nothing is an authentication
    /// failure, not an empty result. Policy-blocked roles drop out silently.
    RoleSet get_user_roles(const std::string& tenant, const std::string& username,
                           const std::optional<std::string>& group_key = std::nullopt) {
        catalog::UserRecord u = cat_.user(tenant, username); // UserNotFound
        std::set<std::uint64_t> candidates(u.assigned_role_ids.begin(),
                                           u.assigned_role_ids.end());
        if (group_key) {
            bool unlocked = false;
            for (const std::string& gid : u.group_ids) {
                if (!cat_.verify_group_key(tenant, gid, *group_key)) continue;
                unlocked = true;
                catalog::GroupRecord g = cat_.group(tenant, gid);
                candidates.insert(g.role_ids.begin(), g.role_ids.end());
            }
            if (!unlocked) {
                throw Error(Errc::group_auth_failure,
                            "group key rejected for " + username);
            }
        }

        RoleSet out;
        out.user_id = u.user_id;
        int hour = hour_();
        for (std::uint64_t rid : candidates) {
            bool exists = cat_.with_tree(
                tenant, [&](const hierarchy::RoleTree& t) { return t.contains(rid); });
            if (!exists) continue; // role deleted after assignment
            catalog::RolePolicy pol = cat_.role_policy(tenant, rid);
            if (pol.window_start_hour &&
                !(*pol.window_start_hour <= hour && hour < *pol.window_end_hour)) {
                continue;
            }
            if (pol.max_concurrent) {
                std::lock_guard lk(mu_);
                if (total_refcount_locked(tenant, rid) >= *pol.max_concurrent) continue;
            }
            out.roles.insert(rid);
        }
        return out;
    }

    /// Picks Rol_a and records the activation. When one member of the set is
    /// senior to all others it wins and the returned delta is empty — its
    /// effective permissions already cover the set. Otherwise the role
    /// covering most of the query's columns wins (ties: smallest lft) and the
    /// delta is its effective grants minus what the user already holds live.
    std::pair<std::uint64_t, PermissionSet> activate_permission(
        const std::string& tenant, const std::string& transaction_id,
        const RoleSet& role_set, const std::optional<QueryContext>& ctx = std::nullopt) {
        std::lock_guard lk(mu_);
        return cat_.with_tree(tenant, [&](const hierarchy::RoleTree& tree) {
            std::vector<std::uint64_t> in_tree;
            for (std::uint64_t rid : role_set.roles) {
                if (tree.contains(rid)) in_tree.push_back(rid);
            }
            if (in_tree.empty()) {
                throw Error(Errc::no_activatable_role,
                            "no requested role exists in tenant " + tenant);
            }

            std::uint64_t chosen = 0;
            bool dominated = false;
            if (in_tree.size() >= 2) {
                for (std::uint64_t c : in_tree) {
                    bool senior_of_all = true;
                    for (std::uint64_t o : in_tree) {
                        if (o != c && !tree.is_senior(c, o)) {
                            senior_of_all = false;
                            break;
                        }
                    }
                    if (senior_of_all) {
                        chosen = c;
                        dominated = true;
                        break;
                    }
                }
            }
            if (!dominated) {
                std::size_t best_cover = 0;
                int best_lft = 0;
                for (std::uint64_t c : in_tree) {
                    std::size_t cover = 0;
                    if (ctx) {
                        for (const Grant& g : tree.effective_grants(c)) {
                            if (g.action == ctx->action && g.table == ctx->table &&
                                ctx->columns.contains(g.column)) {
                                ++cover;
                            }
                        }
                    }
                    int lft = tree.node(c).lft;
                    if (chosen == 0 || cover > best_cover ||
                        (cover == best_cover && lft < best_lft)) {
                        chosen = c;
                        best_cover = cover;
                        best_lft = lft;
                    }
                }
            }

            PermissionSet delta;
            if (!dominated) {
                GrantSet before = live_grants_locked(tenant, role_set.user_id, tree);
                delta = regroup(grant_difference(tree.effective_grants(chosen), before));
            }

            auto& records = state_[{tenant, role_set.user_id}];
            auto it = records.find(chosen);
            if (it != records.end()) {
                it->second.refcount++;
                return std::pair<std::uint64_t, PermissionSet>(chosen, PermissionSet{});
            }
            records.emplace(chosen, ActivationRecord{role_set.user_id, transaction_id,
                                                     chosen, delta, 1});
            return std::pair<std::uint64_t, PermissionSet>(chosen, delta);
        });
    }

    /// Reverses one activation. The revoked set is what the user genuinely
    /// loses: Rol_d's effective grants minus everything still derivable from
    /// the remaining live activations (Per_all). Refcounted records revoke
    /// nothing until the last reference goes.
    PermissionSet deactivate_permission(const std::string& tenant, std::uint64_t user_id,
                                        const std::string& transaction_id,
                                        std::uint64_t role_id) {
        (void)transaction_id; // concurrent transactions share one record
        std::lock_guard lk(mu_);
        auto sit = state_.find({tenant, user_id});
        if (sit == state_.end() || !sit->second.contains(role_id)) {
            throw Error(Errc::not_activated, "role id " + std::to_string(role_id) +
                                                 " is not active for this user");
        }
        ActivationRecord& rec = sit->second.at(role_id);
        if (--rec.refcount > 0) return {};
        sit->second.erase(role_id);

        PermissionSet revoked = cat_.with_tree(tenant, [&](const hierarchy::RoleTree& t) {
            if (!t.contains(role_id)) return PermissionSet{}; // role deleted meanwhile
            GrantSet still = live_grants_locked(tenant, user_id, t);
            return regroup(grant_difference(t.effective_grants(role_id), still));
        });
        if (sit->second.empty()) state_.erase(sit);
        return revoked;
    }

    /// Col_ret for one parsed statement, or a denial. Admissibility demands
    /// every referenced column be granted for the statement's action, and
    /// every referenced sensitive column carry the extra sensitive grant —
    /// waived only while the tenant's root role is active.
    ColumnGrant get_user_columns(const std::string& tenant, std::uint64_t user_id,
                                 const sql::ParsedQuery& q) {
        ColumnGrant out;
        out.table = q.table;
        bool admin_active = false;
        {
            std::lock_guard lk(mu_);
            cat_.with_tree(tenant, [&](const hierarchy::RoleTree& tree) {
                auto sit = state_.find({tenant, user_id});
                if (sit != state_.end()) {
                    for (const auto& [rid, rec] : sit->second) {
                        if (tree.contains(rid) && tree.is_root(rid)) admin_active = true;
                    }
                }
                for (const Grant& g : live_grants_locked(tenant, user_id, tree)) {
                    if (g.action != q.kind || g.table != q.table) continue;
                    out.columns.insert(g.column);
                    if (g.sensitive) out.sensitive_columns.insert(g.column);
                }
                return 0;
            });
        }
        if (out.columns.empty()) {
            throw Error(Errc::table_denied, std::string(action_name(q.kind)) + " on " +
                                                q.table + " is not granted");
        }

        TableSchema schema = cat_.table_schema(q.table);
        if (admin_active) {
            for (const std::string& c : out.columns) {
                if (schema.is_sensitive(c)) out.sensitive_columns.insert(c);
            }
        }

        std::set<std::string> offending;
        for (const std::string& c : q.referenced_columns()) {
            if (!out.columns.contains(c)) {
                offending.insert(c);
            } else if (schema.is_sensitive(c) && !out.sensitive_columns.contains(c)) {
                offending.insert(c);
            }
        }
        if (!offending.empty()) {
            throw Error(Errc::column_denied, "columns not granted for this statement",
                        std::vector<std::string>(offending.begin(), offending.end()));
        }
        return out;
    }

    /// Scratch recomputation of the user's live grants — the oracle the
    /// incremental deltas are audited against.
    GrantSet live_grants(const std::string& tenant, std::uint64_t user_id) {
        std::lock_guard lk(mu_);
        return cat_.with_tree(tenant, [&](const hierarchy::RoleTree& t) {
            return live_grants_locked(tenant, user_id, t);
        });
    }

    std::vector<ActivationRecord> activations(const std::string& tenant,
                                              std::uint64_t user_id) const {
        std::lock_guard lk(mu_);
        std::vector<ActivationRecord> out;
        auto sit = state_.find({tenant, user_id});
        if (sit == state_.end()) return out;
        for (const auto& [rid, rec] : sit->second) out.push_back(rec);
        return out;
    }

    bool role_live(const std::string& tenant, std::uint64_t role_id) const {
        std::lock_guard lk(mu_);
        return total_refcount_locked(tenant, role_id) > 0;
    }

    bool user_live(const std::string& tenant, std::uint64_t user_id) const {
        std::lock_guard lk(mu_);
        auto sit = state_.find({tenant, user_id});
        return sit != state_.end() && !sit->second.empty();
    }

    /// True when no user anywhere holds a live activation (post-run check).
    bool quiescent() const {
        std::lock_guard lk(mu_);
        for (const auto& [key, records] : state_) {
            if (!records.empty()) return false;
        }
        return true;
    }

private:
    GrantSet live_grants_locked(const std::string& tenant, std::uint64_t user_id,
                                const hierarchy::RoleTree& tree) const {
        GrantSet out;
        auto sit = state_.find({tenant, user_id});
        if (sit == state_.end()) return out;
        for (const auto& [rid, rec] : sit->second) {
            if (!tree.contains(rid)) continue; // tolerate roles deleted mid-flight
            GrantSet eff = tree.effective_grants(rid);
            out.insert(eff.begin(), eff.end());
        }
        return out;
    }

    std::uint32_t total_refcount_locked(const std::string& tenant,
                                        std::uint64_t role_id) const {
        std::uint32_t total = 0;
        for (const auto& [key, records] : state_) {
            if (key.first != tenant) continue;
            auto it = records.find(role_id);
            if (it != records.end()) total += it->second.refcount;
        }
        return total;
    }

    static int utc_hour() {
        std::time_t t = std::time(nullptr);
        std::tm tm{};
        gmtime_r(&t, &tm);
        return tm.tm_hour;
    }

    catalog::Catalog& cat_;
    mutable std::mutex mu_;
    std::function<int()> hour_ = &AccessEngine::utc_hour;
    // (tenant, user_id) -> activated role id -> record
    std::map<std::pair<std::string, std::uint64_t>, std::map<std::uint64_t, ActivationRecord>>
        state_;
};

} // namespace rolegate::rbac
