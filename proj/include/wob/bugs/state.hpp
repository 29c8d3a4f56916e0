#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wob/bugs/kinds.hpp"
#include "wob/scene/types.hpp"

namespace wob {

struct ScreenTearEffect {
    int row = 0;  // rows [row, height) come from the stale frame
    int lag = 1;  // frames back
    friend bool operator==(const ScreenTearEffect&, const ScreenTearEffect&) = default;
};

/// Post-render effects active on one frame.
struct FrameEffects {
    bool black_screen = false;
    std::optional<ScreenTearEffect> tear;

    bool empty() const { return !black_screen && !tear; }
    friend bool operator==(const FrameEffects&, const FrameEffects&) = default;
};

/// Fully resolved bug state for one frame.
struct BugState {
    /// Modified world; nullopt means the unmodified input world.
    std::optional<World> world_delta;
    FrameEffects frame_effects;
    std::optional<double> near_plane_override;
    /// Objects whose collision a bug disabled; their back faces carry that kind's tag.
    std::map<std::string, BugKind> backface_kinds;
    /// Kinds that contributed to this state, sorted.
    std::vector<BugKind> active;

    const World& world(const World& base) const { return world_delta ? *world_delta : base; }
    bool is_identity() const {
        return !world_delta && frame_effects.empty() && !near_plane_override && backface_kinds.empty();
    }
    friend bool operator==(const BugState&, const BugState&) = default;
};

}  // namespace wob
