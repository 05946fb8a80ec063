#include "eraser/bench/scenes.hpp"

namespace eraser::bench {

std::string scene_stem(std::string_view path) {
    const auto slash = path.find_last_of('/');
    if (slash != std::string_view::npos) path.remove_prefix(slash + 1);
    if (path.size() > 6 && path.substr(path.size() - 6) == ".bench") path.remove_suffix(6);
    return std::string(path);
}

const EmbeddedScene* find_scene(std::string_view name) {
    const std::string stem = scene_stem(name);
    for (const auto& s : embedded_scenes()) {
        if (s.name == stem) return &s;
    }
    return nullptr;
}

}  // namespace eraser::bench
