#include <chatterbox/errors.hpp>
#include <chatterbox/http_util.hpp>
#include <chatterbox/media_caption.hpp>

namespace chatterbox::caption {

const char* const kVisionPrompt =
    "Given this image that was texted to you, provide a maximum two sentence caption for the "
    "image such that a blind user could understand it. Be particularly descriptive about people, "
    "what they look like, and what they are doing. If there are no people than just give a high "
    "level description. Start your caption with 'An image that shows:'";

const char* const kSpeechPrompt =
    "Transcribe this voice message word for word. Return only the transcript.";

namespace {
constexpr std::string_view kImageOpen = "[**Image Caption**: ";
constexpr std::string_view kAudioOpen = "[**Audio Transcript**: ";
}  // namespace

std::string StubCaptioner::describe(const CaptionRequest& req) {
  requests_.push_back(req);
  auto it = table_.find(req.reference);
  if (it == table_.end()) throw CaptionUnavailable("no caption for " + req.reference);
  return it->second;
}

HttpCaptioner::HttpCaptioner(std::string url) : url_(std::move(url)) {}

std::string HttpCaptioner::describe(const CaptionRequest& req) {
  nlohmann::json body = {{"kind", std::string(to_string(req.kind))},
                         {"reference", req.reference},
                         {"prompt", req.prompt}};
  try {
    auto reply = http::post_json(url_, body.dump());
    auto j = nlohmann::json::parse(reply);
    auto text = j.at("caption").get<std::string>();
    if (text.empty()) throw CaptionUnavailable("empty caption");
    return text;
  } catch (const CaptionUnavailable&) {
    throw;
  } catch (const std::exception& e) {
    throw CaptionUnavailable(e.what());
  }
}

std::string image_marker(const std::string& caption) {
  return std::string(kImageOpen) + caption + "]";
}

std::string audio_marker(const std::string& transcript) {
  return std::string(kAudioOpen) + transcript + "]";
}

std::string marker_for(MediaKind kind, const std::string& caption) {
  return kind == MediaKind::audio ? audio_marker(caption) : image_marker(caption);
}

std::string placeholder_marker(MediaKind kind) {
  switch (kind) {
    case MediaKind::image: return image_marker("(an image was received but could not be viewed)");
    case MediaKind::video: return image_marker("(a video was received but could not be viewed)");
    case MediaKind::audio: return audio_marker("(a voice message was received but could not be played)");
  }
  return image_marker("(media)");
}

std::optional<std::pair<MediaKind, std::string>> parse_marker(std::string_view marker) {
  if (marker.empty() || marker.back() != ']') return std::nullopt;
  auto body = [&](std::string_view open) {
    return std::string(marker.substr(open.size(), marker.size() - open.size() - 1));
  };
  if (marker.substr(0, kImageOpen.size()) == kImageOpen)
    return std::make_pair(MediaKind::image, body(kImageOpen));
  if (marker.substr(0, kAudioOpen.size()) == kAudioOpen)
    return std::make_pair(MediaKind::audio, body(kAudioOpen));
  return std::nullopt;
}

std::vector<std::pair<MediaKind, std::string>> find_markers(std::string_view text) {
  std::vector<std::pair<MediaKind, std::string>> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto img = text.find(kImageOpen, pos);
    auto aud = text.find(kAudioOpen, pos);
    auto start = std::min(img, aud);
    if (start == std::string_view::npos) break;
    auto open = start == img ? kImageOpen : kAudioOpen;
    // Captions may contain brackets; the marker ends at the last ']' before the next marker.
    auto next = std::min(text.find(kImageOpen, start + open.size()),
                         text.find(kAudioOpen, start + open.size()));
    auto limit = next == std::string_view::npos ? text.size() : next;
    auto close = text.rfind(']', limit - 1);
    if (close == std::string_view::npos || close < start + open.size()) break;
    if (auto m = parse_marker(text.substr(start, close - start + 1))) out.push_back(*m);
    pos = close + 1;
  }
  return out;
}

CaptionedMedia caption(const MediaRef& media, Captioner& backend) {
  CaptionedMedia out;
  out.kind = media.kind;
  out.asset_ref = media.asset_ref;
  CaptionRequest req;
  req.kind = media.kind;
  switch (media.kind) {
    case MediaKind::image:
      req.reference = media.asset_ref;
      req.prompt = kVisionPrompt;
      break;
    case MediaKind::video:
      // Only the first frame is described.
      req.reference = media.frames.empty() ? media.asset_ref : media.frames.front();
      req.prompt = kVisionPrompt;
      break;
    case MediaKind::audio:
      req.reference = media.asset_ref;
      req.prompt = kSpeechPrompt;
      break;
  }
  try {
    out.caption = backend.describe(req);
    out.marker_text = marker_for(media.kind, out.caption);
  } catch (const std::exception&) {
    // Any captioner failure degrades to a placeholder; inbound handling must go on.
    out.captioned = false;
    out.marker_text = placeholder_marker(media.kind);
  }
  return out;
}

}  // namespace chatterbox::caption
