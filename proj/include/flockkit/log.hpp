#pragma once

#include <iostream>
#include <mutex>
#include <set>
#include <string>

namespace flockkit {

/// Prints a warning to stderr the first time a given key is seen.
inline void warn_once(const std::string& key, const std::string& message) {
    static std::mutex mutex;
    static std::set<std::string> seen;
    std::scoped_lock lock(mutex);
    if (seen.insert(key).second) {
        std::clog << "flockkit: warning: " << message << '\n';
    }
}

} // namespace flockkit
