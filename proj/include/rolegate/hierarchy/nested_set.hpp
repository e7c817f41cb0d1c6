#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rolegate/errors.hpp"
#include "rolegate/permission.hpp"

namespace rolegate::hierarchy {

struct RoleNode {
    std::uint64_t role_id = 0;
    std::string tenant_id;
    std::string name;
    int lft = 0;
    int rgt = 0;
    PermissionSet permissions;
    bool sensitive_allowed = false;
};

/// One tenant's role hierarchy in Nested Set encoding: every role carries an
/// (lft, rgt) interval, seniors are the containing intervals, juniors the
/// contained ones. Exactly one root (the tenant admin role); each role is a
/// single entry.
///
/// Reads are const and safely concurrent; structural edits expect external
/// serialization (the catalog holds a per-tenant writer lock).
class RoleTree {
public:
    RoleTree() = default;
    explicit RoleTree(std::string tenant_id) : tenant_id_(std::move(tenant_id)) {}

    const std::string& tenant_id() const { return tenant_id_; }
    std::size_t size() const { return nodes_.size(); }
    bool empty() const { return nodes_.empty(); }

    const RoleNode& node(std::uint64_t role_id) const {
        auto it = nodes_.find(role_id);
        if (it == nodes_.end()) {
            throw Error(Errc::role_not_found, "role id " + std::to_string(role_id));
        }
        return it->second;
    }

    const RoleNode* find_by_name(const std::string& name) const {
        auto it = by_name_.find(name);
        return it == by_name_.end() ? nullptr : &nodes_.at(it->second);
    }

    const RoleNode& named(const std::string& name) const {
        const RoleNode* n = find_by_name(name);
        if (!n) throw Error(Errc::role_not_found, "role " + name);
        return *n;
    }

    const RoleNode* root() const {
        for (const auto& [id, n] : nodes_) {
            if (n.lft == 1) return &n;
        }
        return nullptr;
    }

    bool is_root(std::uint64_t role_id) const { return node(role_id).lft == 1; }

    bool contains(std::uint64_t role_id) const { return nodes_.contains(role_id); }

    /// True when `senior` strictly contains `junior`.
    bool is_senior(std::uint64_t senior_id, std::uint64_t junior_id) const {
        const RoleNode& s = node(senior_id);
        const RoleNode& j = node(junior_id);
        return s.lft < j.lft && s.rgt > j.rgt;
    }

    const RoleNode& insert(std::optional<std::uint64_t> parent_id, std::string name,
                           PermissionSet permissions, bool sensitive_allowed = false) {
        if (by_name_.contains(name)) {
            throw Error(Errc::duplicate_role_name, "role " + name + " already exists");
        }
        int new_lft;
        if (nodes_.empty()) {
            if (parent_id) {
                throw Error(Errc::parent_not_found,
                            "parent id " + std::to_string(*parent_id) + " in empty tree");
            }
            new_lft = 1;
        } else {
            if (!parent_id) {
                throw Error(Errc::parent_not_found, "tenant already has a root role");
            }
            auto it = nodes_.find(*parent_id);
            if (it == nodes_.end()) {
                throw Error(Errc::parent_not_found,
                            "parent id " + std::to_string(*parent_id));
            }
            // Append as the parent's last child: open a two-slot gap at
            // parent.rgt.
            new_lft = it->second.rgt;
            for (auto& [id, n] : nodes_) {
                if (n.rgt >= new_lft) n.rgt += 2;
                if (n.lft > new_lft) n.lft += 2;
            }
        }
        RoleNode n;
        n.role_id = next_id_++;
        n.tenant_id = tenant_id_;
        n.name = std::move(name);
        n.lft = new_lft;
        n.rgt = new_lft + 1;
        n.permissions = std::move(permissions);
        n.sensitive_allowed = sensitive_allowed || n.lft == 1 ||
                              std::any_of(n.permissions.begin(), n.permissions.end(),
                                          [](const Permission& p) { return p.sensitive; });
        by_name_[n.name] = n.role_id;
        auto [pos, ok] = nodes_.emplace(n.role_id, std::move(n));
        (void)ok;
        return pos->second;
    }

    /// Removes a role; its children are promoted to the deleted node's
    /// immediate senior, keeping their order. The root is only deletable as
    /// a leaf.
    void erase(std::uint64_t role_id) {
        const RoleNode& victim = node(role_id);
        if (victim.lft == 1 && victim.rgt != 2) {
            throw Error(Errc::cannot_delete_root,
                        "root role " + victim.name + " still has juniors");
        }
        int vl = victim.lft;
        int vr = victim.rgt;
        by_name_.erase(victim.name);
        nodes_.erase(role_id);
        // Drop the victim's two bound values and renumber: coordinates inside
        // the victim's interval lose one slot, those past it lose two.
        for (auto& [id, n] : nodes_) {
            if (n.lft > vl && n.lft < vr) n.lft -= 1;
            else if (n.lft > vr) n.lft -= 2;
            if (n.rgt > vl && n.rgt < vr) n.rgt -= 1;
            else if (n.rgt > vr) n.rgt -= 2;
        }
    }

    /// All strict containers of `role_id`, nearest first.
    std::vector<const RoleNode*> seniors(std::uint64_t role_id) const {
        const RoleNode& r = node(role_id);
        std::vector<const RoleNode*> out;
        for (const auto& [id, n] : nodes_) {
            if (n.lft < r.lft && n.rgt > r.rgt) out.push_back(&n);
        }
        std::sort(out.begin(), out.end(),
                  [](const RoleNode* a, const RoleNode* b) { return a->lft > b->lft; });
        return out;
    }

    /// All roles strictly inside `role_id`'s interval, in tree order.
    std::vector<const RoleNode*> juniors(std::uint64_t role_id) const {
        const RoleNode& r = node(role_id);
        std::vector<const RoleNode*> out;
        for (const auto& [id, n] : nodes_) {
            if (n.lft > r.lft && n.rgt < r.rgt) out.push_back(&n);
        }
        std::sort(out.begin(), out.end(),
                  [](const RoleNode* a, const RoleNode* b) { return a->lft < b->lft; });
        return out;
    }

    const RoleNode* immediate_senior(std::uint64_t role_id) const {
        auto s = seniors(role_id);
        return s.empty() ? nullptr : s.front();
    }

    /// Roles sharing the immediate senior, excluding the role itself.
    std::vector<const RoleNode*> siblings(std::uint64_t role_id) const {
        const RoleNode* parent = immediate_senior(role_id);
        std::vector<const RoleNode*> out;
        if (!parent) return out;
        for (const auto& [id, n] : nodes_) {
            if (id == role_id) continue;
            if (n.lft > parent->lft && n.rgt < parent->rgt) {
                // Direct child of parent: no node sits strictly between them.
                auto s = seniors(id);
                if (!s.empty() && s.front()->role_id == parent->role_id) {
                    out.push_back(&n);
                }
            }
        }
        std::sort(out.begin(), out.end(),
                  [](const RoleNode* a, const RoleNode* b) { return a->lft < b->lft; });
        return out;
    }

    /// A role confers its own permissions plus everything its juniors hold:
    /// seniors dominate. Returned as column-atomic grants.
    GrantSet effective_grants(std::uint64_t role_id) const {
        const RoleNode& r = node(role_id);
        GrantSet out = atomize(r.permissions);
        for (const RoleNode* j : juniors(role_id)) {
            GrantSet g = atomize(j->permissions);
            out.insert(g.begin(), g.end());
        }
        return out;
    }

    PermissionSet effective_permissions(std::uint64_t role_id) const {
        return regroup(effective_grants(role_id));
    }

    std::vector<const RoleNode*> all() const {
        std::vector<const RoleNode*> out;
        out.reserve(nodes_.size());
        for (const auto& [id, n] : nodes_) out.push_back(&n);
        std::sort(out.begin(), out.end(),
                  [](const RoleNode* a, const RoleNode* b) { return a->lft < b->lft; });
        return out;
    }

    /// Swaps a role's permission set (grant/revoke path). Structure is
    /// untouched, so no renumbering happens.
    void replace_permissions(std::uint64_t role_id, PermissionSet permissions,
                             bool sensitive_allowed) {
        auto it = nodes_.find(role_id);
        if (it == nodes_.end()) {
            throw Error(Errc::role_not_found, "role id " + std::to_string(role_id));
        }
        it->second.permissions = std::move(permissions);
        it->second.sensitive_allowed = sensitive_allowed || it->second.lft == 1;
    }

    std::uint64_t next_id() const { return next_id_; }

    /// Restores the id counter from a snapshot so ids stay stable across a
    /// reload even when the highest-numbered role has been deleted.
    void set_next_id(std::uint64_t v) { next_id_ = std::max(next_id_, v); }

    /// Re-adds a persisted node verbatim (catalog reload path). Callers run
    /// validate() after the last restore.
    void restore(RoleNode n) {
        if (by_name_.contains(n.name) || nodes_.contains(n.role_id)) {
            throw Error(Errc::duplicate_role_name, "restore collides: " + n.name);
        }
        next_id_ = std::max(next_id_, n.role_id + 1);
        by_name_[n.name] = n.role_id;
        nodes_.emplace(n.role_id, std::move(n));
    }

    /// Structural self-check: bounds form a permutation of 1..2n, intervals
    /// nest or are disjoint, single root spans everything, odd widths.
    void validate() const {
        if (nodes_.empty()) return;
        std::vector<int> coords;
        for (const auto& [id, n] : nodes_) {
            if (n.lft >= n.rgt) {
                throw Error(Errc::config_error, "role " + n.name + ": lft >= rgt");
            }
            if ((n.rgt - n.lft) % 2 == 0) {
                throw Error(Errc::config_error, "role " + n.name + ": even interval");
            }
            coords.push_back(n.lft);
            coords.push_back(n.rgt);
        }
        std::sort(coords.begin(), coords.end());
        for (std::size_t i = 0; i < coords.size(); ++i) {
            if (coords[i] != static_cast<int>(i) + 1) {
                throw Error(Errc::config_error, "bounds are not a 1..2n permutation");
            }
        }
        int roots = 0;
        for (const auto& [id, a] : nodes_) {
            if (a.lft == 1) {
                ++roots;
                if (a.rgt != static_cast<int>(2 * nodes_.size())) {
                    throw Error(Errc::config_error, "root does not span the tree");
                }
            }
            for (const auto& [id2, b] : nodes_) {
                bool disjoint = a.rgt < b.lft || b.rgt < a.lft;
                bool a_in_b = b.lft < a.lft && a.rgt < b.rgt;
                bool b_in_a = a.lft < b.lft && b.rgt < a.rgt;
                if (id != id2 && !disjoint && !a_in_b && !b_in_a) {
                    throw Error(Errc::config_error,
                                "intervals overlap: " + a.name + " / " + b.name);
                }
            }
        }
        if (roots != 1) throw Error(Errc::config_error, "tenant must have one root");
    }

private:
    std::string tenant_id_;
    std::uint64_t next_id_ = 1;
    std::map<std::uint64_t, RoleNode> nodes_;
    std::map<std::string, std::uint64_t> by_name_;
};

} // namespace rolegate::hierarchy
