#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>

namespace rfse {

/// Track identity: the step a track was born plus a disambiguating index.
/// Ordered lexicographically, serialized as "birth_step.index".
struct Label {
    int birth_step = 0;
    int index = 0;

    auto operator<=>(const Label&) const = default;

    [[nodiscard]] std::string str() const {
        return std::to_string(birth_step) + "." + std::to_string(index);
    }

    static Label parse(const std::string& s);
};

inline std::ostream& operator<<(std::ostream& os, const Label& l) {
    return os << l.str();
}

struct LabelHash {
    std::size_t operator()(const Label& l) const noexcept {
        auto a = static_cast<std::uint64_t>(static_cast<std::uint32_t>(l.birth_step));
        auto b = static_cast<std::uint64_t>(static_cast<std::uint32_t>(l.index));
        return std::hash<std::uint64_t>{}((a << 32) ^ b);
    }
};

}  // namespace rfse
