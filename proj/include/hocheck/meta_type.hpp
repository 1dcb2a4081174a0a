#ifndef HOCHECK_META_TYPE_HPP
#define HOCHECK_META_TYPE_HPP

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace hocheck {

/// The four meta-level base types: object types, object terms, proofs and goals.
enum class Base : std::uint8_t { tp, tm, pf, o };

inline std::string_view base_name(Base b)
{
    switch (b) {
    case Base::tp: return "tp";
    case Base::tm: return "tm";
    case Base::pf: return "pf";
    case Base::o: return "o";
    }
    return "?";
}

inline std::optional<Base> base_from_name(std::string_view s)
{
    if (s == "tp") return Base::tp;
    if (s == "tm") return Base::tm;
    if (s == "pf") return Base::pf;
    if (s == "o") return Base::o;
    return std::nullopt;
}

/// A simple meta-type. Ground meta-types are built from bases and arrows only;
/// type variables exist during inference and in the schemes of polymorphic builtins.
class MetaType {
public:
    enum class Kind : std::uint8_t { base, arrow, var };

    MetaType() : MetaType(base(Base::o)) {}

    static MetaType base(Base b)
    {
        static const std::shared_ptr<const Node> nodes[4] = {
            std::make_shared<const Node>(Node{Kind::base, Base::tp, 0, {}, {}}),
            std::make_shared<const Node>(Node{Kind::base, Base::tm, 0, {}, {}}),
            std::make_shared<const Node>(Node{Kind::base, Base::pf, 0, {}, {}}),
            std::make_shared<const Node>(Node{Kind::base, Base::o, 0, {}, {}}),
        };
        return MetaType(nodes[static_cast<int>(b)]);
    }
    static MetaType tp() { return base(Base::tp); }
    static MetaType tm() { return base(Base::tm); }
    static MetaType pf() { return base(Base::pf); }
    static MetaType o() { return base(Base::o); }

    static MetaType arrow(MetaType dom, MetaType cod)
    {
        return MetaType(std::make_shared<const Node>(
            Node{Kind::arrow, Base::o, 0, std::move(dom.node_), std::move(cod.node_)}));
    }

    static MetaType var(std::uint32_t id)
    {
        return MetaType(std::make_shared<const Node>(Node{Kind::var, Base::o, id, {}, {}}));
    }

    /// A type variable id unique within the process.
    static MetaType fresh_var()
    {
        static std::atomic<std::uint32_t> counter{1u << 20};
        return var(counter.fetch_add(1, std::memory_order_relaxed));
    }

    Kind kind() const { return node_->kind; }
    bool is_base() const { return node_->kind == Kind::base; }
    bool is_base(Base b) const { return is_base() && node_->base == b; }
    bool is_arrow() const { return node_->kind == Kind::arrow; }
    bool is_var() const { return node_->kind == Kind::var; }

    Base base_kind() const { return node_->base; }
    std::uint32_t var_id() const { return node_->var; }
    MetaType domain() const { return MetaType(node_->dom); }
    MetaType codomain() const { return MetaType(node_->cod); }

    bool is_ground() const
    {
        switch (kind()) {
        case Kind::base: return true;
        case Kind::var: return false;
        case Kind::arrow: return domain().is_ground() && codomain().is_ground();
        }
        return false;
    }

    /// Number of leading arrows.
    std::size_t arity() const
    {
        std::size_t n = 0;
        for (MetaType t = *this; t.is_arrow(); t = t.codomain()) ++n;
        return n;
    }

    /// Result type after stripping `n` arrows.
    MetaType strip(std::size_t n) const
    {
        MetaType t = *this;
        while (n-- > 0 && t.is_arrow()) t = t.codomain();
        return t;
    }

    /// Final codomain after all arrows.
    MetaType target() const { return strip(arity()); }

    bool occurs(std::uint32_t id) const
    {
        switch (kind()) {
        case Kind::base: return false;
        case Kind::var: return var_id() == id;
        case Kind::arrow: return domain().occurs(id) || codomain().occurs(id);
        }
        return false;
    }

    friend bool operator==(const MetaType& a, const MetaType& b)
    {
        if (a.node_ == b.node_) return true;
        if (a.kind() != b.kind()) return false;
        switch (a.kind()) {
        case Kind::base: return a.base_kind() == b.base_kind();
        case Kind::var: return a.var_id() == b.var_id();
        case Kind::arrow: return a.domain() == b.domain() && a.codomain() == b.codomain();
        }
        return false;
    }
    friend bool operator!=(const MetaType& a, const MetaType& b) { return !(a == b); }

    std::string str() const
    {
        switch (kind()) {
        case Kind::base: return std::string(base_name(base_kind()));
        case Kind::var: return "'" + std::to_string(var_id());
        case Kind::arrow: {
            std::string d = domain().str();
            if (domain().is_arrow()) d = "(" + d + ")";
            return d + " -> " + codomain().str();
        }
        }
        return "?";
    }

private:
    struct Node {
        Kind kind;
        Base base;
        std::uint32_t var;
        std::shared_ptr<const Node> dom;
        std::shared_ptr<const Node> cod;
    };

    explicit MetaType(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    std::shared_ptr<const Node> node_;
};

/// Builds `a1 -> a2 -> ... -> result`.
template <class... Ts>
MetaType arrows(MetaType first, Ts... rest)
{
    if constexpr (sizeof...(rest) == 0) {
        return first;
    } else {
        return MetaType::arrow(std::move(first), arrows(std::move(rest)...));
    }
}

} // namespace hocheck

#endif // HOCHECK_META_TYPE_HPP
