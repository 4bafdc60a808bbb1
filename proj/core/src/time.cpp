#include "fails/time.hpp"

#include <fmt/format.h>

#include <charconv>

namespace fails {

namespace {

bool read_int(std::string_view text, std::size_t pos, std::size_t width,
              int& out) {
  if (pos + width > text.size()) return false;
  const char* first = text.data() + pos;
  for (std::size_t i = 0; i < width; ++i) {
    if (first[i] < '0' || first[i] > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(first, first + width, out);
  return ec == std::errc{} && ptr == first + width;
}

}  // namespace

Timestamp Timestamp::from_civil(int year, unsigned month, unsigned day,
                                int hour, int minute, int second) {
  using namespace std::chrono;
  const sys_days d{std::chrono::year{year} / std::chrono::month{month} /
                   std::chrono::day{day}};
  return Timestamp(d + hours{hour} + minutes{minute} + seconds{second});
}

std::optional<Timestamp> Timestamp::parse_iso(std::string_view text) {
  // YYYY-MM-DDTHH:MM:SSZ
  if (text.size() != 20 || text[4] != '-' || text[7] != '-' ||
      text[10] != 'T' || text[13] != ':' || text[16] != ':' ||
      text[19] != 'Z') {
    return std::nullopt;
  }
  int y, mo, d, h, mi, s;
  if (!read_int(text, 0, 4, y) || !read_int(text, 5, 2, mo) ||
      !read_int(text, 8, 2, d) || !read_int(text, 11, 2, h) ||
      !read_int(text, 14, 2, mi) || !read_int(text, 17, 2, s)) {
    return std::nullopt;
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) return std::nullopt;
  return from_civil(y, mo, d, h, mi, s);
}

Timestamp Timestamp::now() {
  return Timestamp(std::chrono::floor<Seconds>(std::chrono::system_clock::now()));
}

std::string Timestamp::iso() const {
  using namespace std::chrono;
  const auto day_start = floor<days>(instant_);
  const year_month_day ymd{day_start};
  const hh_mm_ss hms{instant_ - day_start};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z",
                     static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()),
                     static_cast<unsigned>(ymd.day()), hms.hours().count(),
                     hms.minutes().count(), hms.seconds().count());
}

std::string Timestamp::date() const { return iso().substr(0, 10); }

Timestamp Timestamp::floor_day() const {
  return Timestamp(std::chrono::floor<std::chrono::days>(instant_));
}

unsigned Timestamp::weekday_monday_first() const {
  const std::chrono::weekday wd{std::chrono::floor<std::chrono::days>(instant_)};
  return (wd.c_encoding() + 6) % 7;
}

unsigned Timestamp::hour_of_day() const {
  const auto since_midnight =
      instant_ - std::chrono::floor<std::chrono::days>(instant_);
  return static_cast<unsigned>(since_midnight.count() / 3600);
}

}  // namespace fails
