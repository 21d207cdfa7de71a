#ifndef PATNET_KINDS_HPP
#define PATNET_KINDS_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace patnet {

enum class EntityKind : std::uint8_t { Patent, Inventor, Assignee, Group, Subsection };
enum class RelationKind : std::uint8_t { Cite, Write, Own, Contain, Comprise };

inline constexpr std::size_t kEntityKindCount = 5;
inline constexpr std::size_t kRelationCount = 5;

inline constexpr std::array<EntityKind, kEntityKindCount> kAllEntityKinds = {
    EntityKind::Patent, EntityKind::Inventor, EntityKind::Assignee, EntityKind::Group,
    EntityKind::Subsection};

inline constexpr std::array<RelationKind, kRelationCount> kAllRelations = {
    RelationKind::Cite, RelationKind::Write, RelationKind::Own, RelationKind::Contain,
    RelationKind::Comprise};

constexpr std::size_t index_of(EntityKind k) { return static_cast<std::size_t>(k); }
constexpr std::size_t index_of(RelationKind r) { return static_cast<std::size_t>(r); }

struct SchemaPair {
  EntityKind head;
  EntityKind tail;
};

constexpr SchemaPair schema_of(RelationKind r) {
  switch (r) {
    case RelationKind::Cite: return {EntityKind::Patent, EntityKind::Patent};
    case RelationKind::Write: return {EntityKind::Inventor, EntityKind::Patent};
    case RelationKind::Own: return {EntityKind::Assignee, EntityKind::Patent};
    case RelationKind::Contain: return {EntityKind::Group, EntityKind::Patent};
    case RelationKind::Comprise: return {EntityKind::Subsection, EntityKind::Group};
  }
  return {EntityKind::Patent, EntityKind::Patent};
}

constexpr std::string_view to_string(EntityKind k) {
  switch (k) {
    case EntityKind::Patent: return "patent";
    case EntityKind::Inventor: return "inventor";
    case EntityKind::Assignee: return "assignee";
    case EntityKind::Group: return "group";
    case EntityKind::Subsection: return "subsection";
  }
  return "?";
}

constexpr std::string_view to_string(RelationKind r) {
  switch (r) {
    case RelationKind::Cite: return "cite";
    case RelationKind::Write: return "write";
    case RelationKind::Own: return "own";
    case RelationKind::Contain: return "contain";
    case RelationKind::Comprise: return "comprise";
  }
  return "?";
}

constexpr std::optional<EntityKind> parse_entity_kind(std::string_view s) {
  for (auto k : kAllEntityKinds) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

constexpr std::optional<RelationKind> parse_relation(std::string_view s) {
  for (auto r : kAllRelations) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

enum class Side : std::uint8_t { Head, Tail };

constexpr std::string_view to_string(Side s) { return s == Side::Head ? "head" : "tail"; }

enum class Pool : std::uint8_t { SameKind, AllEntities };

}  // namespace patnet

#endif  // PATNET_KINDS_HPP
