#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace fails {

using Seconds = std::chrono::seconds;

/// A UTC instant with one-second resolution.
///
/// There is no way to build a Timestamp carrying a local offset: every
/// constructor takes an absolute instant, and the only text form is
/// `YYYY-MM-DDTHH:MM:SSZ`.
class Timestamp {
 public:
  constexpr Timestamp() = default;
  constexpr explicit Timestamp(std::chrono::sys_seconds instant)
      : instant_(instant) {}

  static constexpr Timestamp from_unix(std::int64_t secs) {
    return Timestamp(std::chrono::sys_seconds{Seconds{secs}});
  }
  static Timestamp from_civil(int year, unsigned month, unsigned day,
                              int hour = 0, int minute = 0, int second = 0);

  /// Parses the canonical `YYYY-MM-DDTHH:MM:SSZ` form only.
  static std::optional<Timestamp> parse_iso(std::string_view text);
  static Timestamp now();

  constexpr std::chrono::sys_seconds instant() const { return instant_; }
  constexpr std::int64_t unix_seconds() const {
    return instant_.time_since_epoch().count();
  }

  std::string iso() const;
  /// `YYYY-MM-DD`
  std::string date() const;

  Timestamp floor_day() const;
  /// 0 = Monday ... 6 = Sunday.
  unsigned weekday_monday_first() const;
  unsigned hour_of_day() const;

  constexpr Timestamp operator+(Seconds d) const { return Timestamp(instant_ + d); }
  constexpr Timestamp operator-(Seconds d) const { return Timestamp(instant_ - d); }
  constexpr Seconds operator-(Timestamp other) const {
    return instant_ - other.instant_;
  }

  constexpr auto operator<=>(const Timestamp&) const = default;

 private:
  std::chrono::sys_seconds instant_{};
};

inline constexpr Seconds kDay{86400};

}  // namespace fails
