#pragma once

#include <string_view>

#include "fails/time.hpp"

namespace fails {

/// Converts a source timestamp to UTC.
///
/// Accepted shapes (see docs/providers.md):
///   ISO-8601      2025-01-10T13:03:25Z, 2023-03-16T10:00:12.345-07:00,
///                 2024-05-02 10:00:00 (zoneless), 2024-05-02 (date only)
///   month-name    Mar 16, 2023 10:00 PST, March 16, 2023 - 10:00 PM PDT
///   RFC 1123      Thu, 16 Mar 2023 18:00:00 GMT
///
/// Zone tokens may be `Z`, numeric offsets, common abbreviations (PST, EDT,
/// CET, ...) or one of the IANA names with built-in DST rules. Zoneless
/// inputs use `assumed_zone`. Fractional seconds are truncated.
///
/// Throws Error(kUnparseableTimestamp) naming the input and the shapes tried.
Timestamp normalize_timestamp(std::string_view raw,
                              std::string_view assumed_zone = "UTC");

/// Offset (local - UTC) in effect in `zone` for a local wall-clock time.
/// Throws Error(kUnparseableTimestamp) for unknown zones.
Seconds zone_offset_for_local(std::string_view zone, Timestamp local_as_utc);

}  // namespace fails
