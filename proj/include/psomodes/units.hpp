#pragma once

#include <array>
#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>

namespace psomodes {

enum class Dimension { None, Capacitance, Inductance, Resistance, Length, Time, Frequency, Velocity };

inline const char* to_string(Dimension d) {
    switch (d) {
    case Dimension::None: return "dimensionless";
    case Dimension::Capacitance: return "capacitance";
    case Dimension::Inductance: return "inductance";
    case Dimension::Resistance: return "resistance";
    case Dimension::Length: return "length";
    case Dimension::Time: return "time";
    case Dimension::Frequency: return "frequency";
    case Dimension::Velocity: return "velocity";
    }
    return "?";
}

/// SI base unit written after a value of the given dimension (serialization).
inline const char* base_unit(Dimension d) {
    switch (d) {
    case Dimension::Capacitance: return "F";
    case Dimension::Inductance: return "H";
    case Dimension::Resistance: return "ohm";
    case Dimension::Length: return "m";
    case Dimension::Time: return "s";
    case Dimension::Frequency: return "Hz";
    case Dimension::Velocity: return "m/s";
    case Dimension::None: return "";
    }
    return "";
}

/// A number in SI units. dim is None for bare numbers, which are accepted for any dimension.
struct Quantity {
    double value = 0.0;
    Dimension dim = Dimension::None;
};

enum class QuantityStatus { Ok, NotANumber, UnknownUnit };

/// Parses "<number>[<prefix><unit>]", e.g. 4.99171mm, 10nH, 1.2e8, 50ohm, 6GHz, 120e6m/s.
/// On UnknownUnit, `offset` is the index where the suffix starts.
inline QuantityStatus parse_quantity(std::string_view token, Quantity& out, std::size_t& offset) {
    double value = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    const char* num_begin = begin;
    if (num_begin != end && *num_begin == '+') ++num_begin;  // from_chars rejects a leading '+'
    auto [ptr, ec] = std::from_chars(num_begin, end, value);
    if (ec != std::errc() || ptr == num_begin) return QuantityStatus::NotANumber;
    offset = static_cast<std::size_t>(ptr - begin);
    const std::string_view suffix(ptr, static_cast<std::size_t>(end - ptr));
    if (suffix.empty()) {
        out = {value, Dimension::None};
        return QuantityStatus::Ok;
    }

    struct Unit {
        std::string_view symbol;
        Dimension dim;
    };
    static constexpr std::array<Unit, 9> units{{{"m/s", Dimension::Velocity},
                                                {"ohm", Dimension::Resistance},
                                                {"Ohm", Dimension::Resistance},
                                                {"\xCE\xA9", Dimension::Resistance},  // Greek capital omega
                                                {"Hz", Dimension::Frequency},
                                                {"F", Dimension::Capacitance},
                                                {"H", Dimension::Inductance},
                                                {"m", Dimension::Length},
                                                {"s", Dimension::Time}}};
    // Decimal exponents, applied by exact powers of ten so "100um" is the double nearest 1e-4.
    struct Prefix {
        std::string_view symbol;
        int exponent;
    };
    static constexpr std::array<Prefix, 11> prefixes{{{"f", -15},
                                                      {"p", -12},
                                                      {"n", -9},
                                                      {"u", -6},
                                                      {"\xC2\xB5", -6},  // micro sign
                                                      {"\xCE\xBC", -6},  // Greek mu
                                                      {"m", -3},
                                                      {"k", 3},
                                                      {"M", 6},
                                                      {"G", 9},
                                                      {"T", 12}}};
    auto apply = [](double v, int e) {
        double p10 = 1.0;
        for (int i = 0; i < (e < 0 ? -e : e); ++i) p10 *= 10.0;
        return e < 0 ? v / p10 : v * p10;
    };
    for (const auto& u : units) {
        if (suffix == u.symbol) {
            out = {value, u.dim};
            return QuantityStatus::Ok;
        }
        if (suffix.size() > u.symbol.size() && suffix.ends_with(u.symbol)) {
            const auto head = suffix.substr(0, suffix.size() - u.symbol.size());
            for (const auto& p : prefixes) {
                if (head == p.symbol) {
                    out = {apply(value, p.exponent), u.dim};
                    return QuantityStatus::Ok;
                }
            }
        }
    }
    return QuantityStatus::UnknownUnit;
}

/// Shortest text that parses back to exactly `value`, followed by the SI base unit.
inline std::string format_quantity(double value, Dimension dim) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    std::string out(buf.data(), ec == std::errc() ? ptr : buf.data());
    return out + base_unit(dim);
}

} // namespace psomodes
