#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "persona/profile_model.h"

namespace persona {

inline constexpr int kProfileFormatVersion = 1;

// Canonical JSON text of a profile. Identical profiles give identical bytes.
std::string serialize_profile(const Profile& profile);
// Throws ParseError (with byte offset for syntax errors) or UnsupportedVersionError.
Profile parse_profile(std::string_view text);

// Writes through a temporary file, fsyncs and renames over path.
void save_profile(const Profile& profile, const std::filesystem::path& path);
Profile load_profile(const std::filesystem::path& path);
// Missing file -> empty profile; anything else as load_profile.
Profile load_or_create_profile(const std::filesystem::path& path);

}  // namespace persona
