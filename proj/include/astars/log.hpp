// SPDX-License-Identifier: Apache-2.0
//
// astars: active STAR-RIS ISAC link-level simulator and optimizer
// Copyright (C) 2026 The astars authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>

namespace astars::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

/// Threshold from ASTARS_LOG (error, warn, info, debug); warn when unset or unrecognized.
inline Level threshold()
{
    static const Level level = [] {
        const char* v = std::getenv("ASTARS_LOG");
        if (!v) return Level::warn;
        const std::string s(v);
        if (s == "error") return Level::error;
        if (s == "info") return Level::info;
        if (s == "debug") return Level::debug;
        return Level::warn;
    }();
    return level;
}

inline bool enabled(Level l) { return static_cast<int>(l) <= static_cast<int>(threshold()); }

inline void write(Level l, const std::string& msg)
{
    if (!enabled(l)) return;
    static std::mutex mu;
    static const char* names[] = {"error", "warn", "info", "debug"};
    std::lock_guard<std::mutex> lock(mu);
    std::cerr << "[astars " << names[static_cast<int>(l)] << "] " << msg << '\n';
}

template <class... Args>
void emit(Level l, const Args&... args)
{
    if (!enabled(l)) return;
    std::ostringstream os;
    (os << ... << args);
    write(l, os.str());
}

template <class... Args> void error(const Args&... a) { emit(Level::error, a...); }
template <class... Args> void warn(const Args&... a) { emit(Level::warn, a...); }
template <class... Args> void info(const Args&... a) { emit(Level::info, a...); }
template <class... Args> void debug(const Args&... a) { emit(Level::debug, a...); }

}  // namespace astars::log
