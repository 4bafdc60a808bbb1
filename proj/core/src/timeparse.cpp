#include "fails/timeparse.hpp"

#include <array>
#include <cctype>
#include <optional>
#include <string>

#include "fails/error.hpp"
#include "text_util.hpp"

namespace fails {

namespace {

using std::chrono::hours;
using std::chrono::minutes;

struct FixedZone {
  std::string_view name;
  int offset_minutes;
};

constexpr std::array<FixedZone, 18> kAbbreviations = {{
    {"z", 0},      {"utc", 0},    {"gmt", 0},    {"ut", 0},
    {"pst", -480}, {"pdt", -420}, {"mst", -420}, {"mdt", -360},
    {"cst", -360}, {"cdt", -300}, {"est", -300}, {"edt", -240},
    {"cet", 60},   {"cest", 120}, {"bst", 60},   {"jst", 540},
    {"aest", 600}, {"aedt", 660},
}};

enum class DstRule { kNone, kUnitedStates, kEuropeanUnion };

struct RuleZone {
  std::string_view name;
  int standard_minutes;
  DstRule rule;
};

constexpr std::array<RuleZone, 12> kRuleZones = {{
    {"utc", 0, DstRule::kNone},
    {"etc/utc", 0, DstRule::kNone},
    {"etc/gmt", 0, DstRule::kNone},
    {"america/los_angeles", -480, DstRule::kUnitedStates},
    {"us/pacific", -480, DstRule::kUnitedStates},
    {"america/denver", -420, DstRule::kUnitedStates},
    {"america/chicago", -360, DstRule::kUnitedStates},
    {"america/new_york", -300, DstRule::kUnitedStates},
    {"us/eastern", -300, DstRule::kUnitedStates},
    {"europe/london", 0, DstRule::kEuropeanUnion},
    {"europe/berlin", 60, DstRule::kEuropeanUnion},
    {"europe/paris", 60, DstRule::kEuropeanUnion},
}};

Timestamp nth_weekday(int year, unsigned month, std::chrono::weekday wd,
                      unsigned n) {
  using namespace std::chrono;
  return Timestamp(sys_days{std::chrono::year{year} / std::chrono::month{month} /
                            wd[n]});
}

Timestamp last_weekday(int year, unsigned month, std::chrono::weekday wd) {
  using namespace std::chrono;
  return Timestamp(sys_days{std::chrono::year{year} / std::chrono::month{month} /
                            wd[last]});
}

int year_of(Timestamp t) {
  using namespace std::chrono;
  return static_cast<int>(year_month_day{floor<days>(t.instant())}.year());
}

// Whether daylight time applies, judged on the standard-time reading of the
// local wall clock.
bool in_dst(DstRule rule, int standard_minutes, Timestamp local_as_utc) {
  using std::chrono::Sunday;
  const int y = year_of(local_as_utc);
  const Seconds std_offset = minutes{standard_minutes};
  const Timestamp utc_if_standard = local_as_utc - std_offset;
  switch (rule) {
    case DstRule::kNone:
      return false;
    case DstRule::kUnitedStates: {
      Timestamp begin_local, end_local;
      if (y >= 2007) {
        begin_local = nth_weekday(y, 3, Sunday, 2) + hours{2};
        end_local = nth_weekday(y, 11, Sunday, 1) + hours{1};
      } else {
        begin_local = nth_weekday(y, 4, Sunday, 1) + hours{2};
        end_local = last_weekday(y, 10, Sunday) + hours{1};
      }
      const Timestamp begin_utc = begin_local - std_offset;
      const Timestamp end_utc = end_local - std_offset;
      return begin_utc <= utc_if_standard && utc_if_standard < end_utc;
    }
    case DstRule::kEuropeanUnion: {
      const Timestamp begin_utc = last_weekday(y, 3, Sunday) + hours{1};
      const Timestamp end_utc = last_weekday(y, 10, Sunday) + hours{1};
      return begin_utc <= utc_if_standard && utc_if_standard < end_utc;
    }
  }
  return false;
}

// "+05:30", "-0700", "+02", optionally prefixed by UTC/GMT.
std::optional<int> parse_numeric_offset(std::string_view text) {
  std::string lower = ascii_lower(text);
  std::string_view t = lower;
  if (t.rfind("utc", 0) == 0 || t.rfind("gmt", 0) == 0) t.remove_prefix(3);
  if (t.empty() || (t[0] != '+' && t[0] != '-')) return std::nullopt;
  const int sign = t[0] == '-' ? -1 : 1;
  t.remove_prefix(1);
  std::string digits;
  for (char c : t) {
    if (c == ':') continue;
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    digits.push_back(c);
  }
  int h = 0, m = 0;
  if (digits.size() == 1 || digits.size() == 2) {
    h = std::stoi(digits);
  } else if (digits.size() == 4) {
    h = std::stoi(digits.substr(0, 2));
    m = std::stoi(digits.substr(2, 2));
  } else {
    return std::nullopt;
  }
  if (h > 14 || m > 59) return std::nullopt;
  return sign * (h * 60 + m);
}

// Offset for an explicit zone token printed next to the time.
std::optional<Seconds> explicit_zone_offset(std::string_view token,
                                            Timestamp local_as_utc) {
  const std::string lower = ascii_lower(trim(token));
  for (const auto& z : kAbbreviations) {
    if (z.name == lower) return minutes{z.offset_minutes};
  }
  if (auto m = parse_numeric_offset(lower)) return minutes{*m};
  for (const auto& z : kRuleZones) {
    if (z.name == lower) {
      const int extra = in_dst(z.rule, z.standard_minutes, local_as_utc) ? 60 : 0;
      return minutes{z.standard_minutes + extra};
    }
  }
  return std::nullopt;
}

class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return done() ? '\0' : text_[pos_]; }
  std::string_view rest() const { return text_.substr(pos_); }
  void skip_spaces() {
    while (!done() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }
  bool eat(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }
  std::optional<int> digits(std::size_t min_len, std::size_t max_len) {
    std::size_t n = 0;
    int value = 0;
    while (n < max_len && pos_ + n < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_ + n]))) {
      value = value * 10 + (text_[pos_ + n] - '0');
      ++n;
    }
    if (n < min_len) return std::nullopt;
    pos_ += n;
    return value;
  }
  std::string_view word() {
    const std::size_t begin = pos_;
    while (!done() && std::isalpha(static_cast<unsigned char>(peek()))) ++pos_;
    return text_.substr(begin, pos_ - begin);
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

std::optional<unsigned> month_from_name(std::string_view name) {
  static constexpr std::string_view kMonths[] = {
      "january", "february", "march",     "april",   "may",      "june",
      "july",    "august",   "september", "october", "november", "december"};
  const std::string lower = ascii_lower(name);
  if (lower.size() < 3) return std::nullopt;
  for (unsigned i = 0; i < 12; ++i) {
    if (kMonths[i] == lower ||
        (lower.size() <= 4 && kMonths[i].substr(0, 3) == lower.substr(0, 3) &&
         (lower.size() == 3 || lower == "sept"))) {
      return i + 1;
    }
  }
  return std::nullopt;
}

struct WallClock {
  int year = 0;
  unsigned month = 0, day = 0;
  int hour = 0, minute = 0, second = 0;
};

bool valid_clock(const WallClock& w) {
  using namespace std::chrono;
  const year_month_day ymd{year{w.year}, month{w.month}, day{w.day}};
  return ymd.ok() && w.hour >= 0 && w.hour <= 23 && w.minute >= 0 &&
         w.minute <= 59 && w.second >= 0 && w.second <= 60;
}

// Parses "HH:MM[:SS[.fff]]" and an optional AM/PM marker.
bool parse_clock(Cursor& c, WallClock& w, bool allow_meridiem) {
  auto h = c.digits(1, 2);
  if (!h || !c.eat(':')) return false;
  auto m = c.digits(2, 2);
  if (!m) return false;
  w.hour = *h;
  w.minute = *m;
  if (c.eat(':')) {
    auto s = c.digits(2, 2);
    if (!s) return false;
    w.second = *s;
    if (c.eat('.') || c.eat(',')) {
      if (!c.digits(1, 9)) return false;
    }
  }
  if (allow_meridiem) {
    Cursor probe = c;
    probe.skip_spaces();
    const std::string marker = ascii_lower(probe.word());
    if (marker == "am" || marker == "pm") {
      if (w.hour < 1 || w.hour > 12) return false;
      if (marker == "am" && w.hour == 12) w.hour = 0;
      if (marker == "pm" && w.hour != 12) w.hour += 12;
      c = probe;
    }
  }
  return true;
}

std::optional<Timestamp> finish(const WallClock& w, std::string_view zone_text,
                                std::string_view assumed_zone) {
  if (!valid_clock(w)) return std::nullopt;
  const Timestamp local = Timestamp::from_civil(w.year, w.month, w.day, w.hour,
                                                w.minute, std::min(w.second, 59));
  const std::string_view zone = trim(zone_text);
  std::optional<Seconds> offset;
  if (zone.empty()) {
    offset = explicit_zone_offset(assumed_zone, local);
  } else {
    offset = explicit_zone_offset(zone, local);
  }
  if (!offset) return std::nullopt;
  return local - *offset;
}

std::optional<Timestamp> parse_iso_like(std::string_view raw,
                                        std::string_view assumed_zone) {
  Cursor c(raw);
  WallClock w;
  auto y = c.digits(4, 4);
  if (!y || !c.eat('-')) return std::nullopt;
  auto mo = c.digits(2, 2);
  if (!mo || !c.eat('-')) return std::nullopt;
  auto d = c.digits(2, 2);
  if (!d) return std::nullopt;
  w.year = *y;
  w.month = static_cast<unsigned>(*mo);
  w.day = static_cast<unsigned>(*d);
  if (c.done()) return finish(w, "", assumed_zone);
  if (!c.eat('T') && !c.eat('t') && !c.eat(' ')) return std::nullopt;
  if (!parse_clock(c, w, false)) return std::nullopt;
  return finish(w, c.rest(), assumed_zone);
}

std::optional<Timestamp> parse_month_name(std::string_view raw,
                                          std::string_view assumed_zone) {
  Cursor c(raw);
  WallClock w;
  auto month = month_from_name(c.word());
  if (!month) return std::nullopt;
  c.eat('.');
  c.skip_spaces();
  auto d = c.digits(1, 2);
  if (!d) return std::nullopt;
  c.eat(',');
  c.skip_spaces();
  auto y = c.digits(4, 4);
  if (!y) return std::nullopt;
  w.year = *y;
  w.month = *month;
  w.day = static_cast<unsigned>(*d);
  c.skip_spaces();
  if (c.eat('-') || c.eat(',')) c.skip_spaces();
  {
    Cursor probe = c;
    if (ascii_lower(probe.word()) == "at") {
      probe.skip_spaces();
      c = probe;
    }
  }
  if (!parse_clock(c, w, true)) return std::nullopt;
  return finish(w, c.rest(), assumed_zone);
}

std::optional<Timestamp> parse_rfc1123(std::string_view raw,
                                       std::string_view assumed_zone) {
  Cursor c(raw);
  WallClock w;
  if (c.word().size() != 3 || !c.eat(',')) return std::nullopt;
  c.skip_spaces();
  auto d = c.digits(1, 2);
  if (!d) return std::nullopt;
  c.skip_spaces();
  auto month = month_from_name(c.word());
  if (!month) return std::nullopt;
  c.skip_spaces();
  auto y = c.digits(4, 4);
  if (!y) return std::nullopt;
  c.skip_spaces();
  w.year = *y;
  w.month = *month;
  w.day = static_cast<unsigned>(*d);
  if (!parse_clock(c, w, false)) return std::nullopt;
  return finish(w, c.rest(), assumed_zone);
}

}  // namespace

Seconds zone_offset_for_local(std::string_view zone, Timestamp local_as_utc) {
  auto offset = explicit_zone_offset(zone, local_as_utc);
  if (!offset) {
    throw Error(ErrorCode::kUnparseableTimestamp,
                "unknown time zone '" + std::string(zone) + "'");
  }
  return *offset;
}

Timestamp normalize_timestamp(std::string_view raw,
                              std::string_view assumed_zone) {
  const std::string_view text = trim(raw);
  if (!text.empty()) {
    if (auto t = parse_iso_like(text, assumed_zone)) return *t;
    if (auto t = parse_month_name(text, assumed_zone)) return *t;
    if (auto t = parse_rfc1123(text, assumed_zone)) return *t;
  }
  throw Error(ErrorCode::kUnparseableTimestamp,
              "unparseable timestamp '" + std::string(raw) +
                  "' (tried ISO-8601, month-name, RFC 1123; zone '" +
                  std::string(assumed_zone) + "')");
}

}  // namespace fails
