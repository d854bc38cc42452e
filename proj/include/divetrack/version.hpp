// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 divetrack contributors

#pragma once

#define DIVETRACK_VERSION "0.1.0"

namespace divetrack {
inline constexpr const char* kVersion = DIVETRACK_VERSION;
}
