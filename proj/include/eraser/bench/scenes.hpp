#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace eraser::bench {

/// A shipped scene compiled into the library.
struct EmbeddedScene {
    std::string name;  // file stem, e.g. walborn_fig1
    std::string text;
};

const std::vector<EmbeddedScene>& embedded_scenes();

/// Shipped scene by stem; a trailing ".bench" and any directory are ignored.
const EmbeddedScene* find_scene(std::string_view name);

/// File stem of a scene path: "dir/walborn_fig1.bench" -> "walborn_fig1".
std::string scene_stem(std::string_view path);

}  // namespace eraser::bench
