#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "wob/core/error.hpp"
#include "wob/core/image.hpp"

namespace wob {

enum class BugKind : int {
    CameraClipping = 0,
    TextureCorruption,
    TextureMissing,
    ZClipping,
    ZFighting,
    GeometryCorruption,
    BlackScreen,
    ScreenTear,
    GeometryClipping,
    BoundaryHole,
};

inline constexpr int kBugKindCount = 10;

inline constexpr std::array<BugKind, kBugKindCount> kAllBugKinds{
    BugKind::CameraClipping,  BugKind::TextureCorruption,  BugKind::TextureMissing, BugKind::ZClipping,
    BugKind::ZFighting,       BugKind::GeometryCorruption, BugKind::BlackScreen,    BugKind::ScreenTear,
    BugKind::GeometryClipping, BugKind::BoundaryHole,
};

inline constexpr std::array<std::string_view, kBugKindCount> kBugKindNames{
    "camera_clipping", "texture_corruption", "texture_missing", "z_clipping",        "z_fighting",
    "geometry_corruption", "black_screen", "screen_tear",       "geometry_clipping", "boundary_hole",
};

// Mask colours, one per kind. None is black (the mask background).
inline constexpr std::array<Rgb, kBugKindCount> kBugTagColors{{
    {230, 25, 75},    // camera_clipping
    {60, 180, 75},    // texture_corruption
    {255, 225, 25},   // texture_missing
    {0, 130, 200},    // z_clipping
    {245, 130, 48},   // z_fighting
    {145, 30, 180},   // geometry_corruption
    {70, 240, 240},   // black_screen
    {240, 50, 230},   // screen_tear
    {210, 245, 60},   // geometry_clipping
    {250, 190, 212},  // boundary_hole
}};

inline constexpr int index_of(BugKind k) { return static_cast<int>(k); }
inline constexpr std::string_view to_string(BugKind k) { return kBugKindNames[index_of(k)]; }
inline constexpr Rgb tag_color(BugKind k) { return kBugTagColors[index_of(k)]; }

inline std::optional<BugKind> parse_bug_kind(std::string_view name) {
    for (int i = 0; i < kBugKindCount; ++i)
        if (kBugKindNames[i] == name) return static_cast<BugKind>(i);
    return std::nullopt;
}

inline BugKind bug_kind_or_throw(std::string_view name) {
    if (auto k = parse_bug_kind(name)) return *k;
    throw ConfigError("unknown bug kind '" + std::string(name) + "'");
}

/// Reverse lookup from a mask colour.
inline std::optional<BugKind> kind_from_color(Rgb c) {
    for (int i = 0; i < kBugKindCount; ++i)
        if (kBugTagColors[i] == c) return static_cast<BugKind>(i);
    return std::nullopt;
}

/// Object-level label: the kind plus the colour it paints in the mask.
struct BugTag {
    BugKind kind = BugKind::TextureMissing;
    Rgb color = tag_color(BugKind::TextureMissing);

    static constexpr BugTag of(BugKind k) { return {k, tag_color(k)}; }
    friend constexpr bool operator==(const BugTag&, const BugTag&) = default;
};

}  // namespace wob
