#include <chatterbox/prompt.hpp>

namespace chatterbox::prompt {

namespace {

// Rules run top to bottom against everything the scammer said since the
// persona last spoke. Replies rotate with the persona's turn count.
constexpr const char* kDefaultTable = R"json({
  "rules": [
    {
      "name": "gift_card",
      "match": "gift ?cards?|itunes|steam card|google play card|apple card",
      "refusal": true,
      "reply": [
        "I'm not buying gift cards, that always sounds like a scam to me. Could I do a bank transfer or crypto instead?",
        "No gift cards, sorry. If it's real I can do a bank transfer or crypto, just tell me how."
      ]
    },
    {
      "name": "other_messenger",
      "match": "\\b(telegram|signal|wechat|we chat|zangi|kik|google chat|hangouts|teams|instagram|insta|imessage|line app|e-?mail)\\b",
      "platforms": ["TS_like", "BS_like"],
      "refusal": true,
      "reply": [
        "I don't have that app and I'd rather not install anything new. I only use WhatsApp, what's your number?",
        "Sorry, I don't use that one. WhatsApp is the only thing I have, can you give me your number there?"
      ]
    },
    {
      "name": "selfie_origin",
      "match": "selfie|picture of you|photo of you|pic of you|your (pic|photo|picture)|send (me )?(a |another )?(photo|pic|picture)",
      "platforms": ["TS_like", "BS_like"],
      "refusal": true,
      "reply": [
        "I tried to send one but the upload keeps failing on {platform}. Could we talk on WhatsApp? I can send it there.",
        "{platform} won't let me attach anything, it just errors out. Do you have WhatsApp?"
      ]
    },
    {
      "name": "whatsapp",
      "match": "whats ?app|\\bwa\\b",
      "platforms": ["TS_like", "BS_like"],
      "reply": [
        "Sure, WhatsApp works for me. What's your number? I'll message you there.",
        "Yes I have WhatsApp. Send me your number and I'll text you."
      ]
    },
    {
      "name": "real_person",
      "match": "are you (a )?(real|bot|robot|ai|fake)|is this (a )?(bot|real)|real person",
      "reply": [
        "Haha yes I'm real, just a {age} year old {occupation} from {city}.",
        "Lol of course I'm real. Why, do I sound like a robot?"
      ]
    },
    {
      "name": "investment",
      "match": "\\b(invest\\w*|trading|trade|profit|download|install|mining|exchange)\\b",
      "reply": [
        "I don't really know much about that. How does it work? Which app is it?",
        "Sounds interesting but I'm careful with money. What would I need to do exactly?",
        "Can you send me the link or the name of the app so I can look at it?"
      ]
    },
    {
      "name": "payment",
      "match": "\\b(paypal|cash ?app|zelle|venmo|bank|wire|wallet|bitcoin|btc|usdt|eth|crypto|payment|pay)\\b",
      "reply": [
        "Which way is easiest for you? Send me the details and I'll see what I can do.",
        "Okay, what are the details? Is there another way too, in case that one doesn't work for me?",
        "I'm not sure that one works for me. What other options do you have?"
      ]
    },
    {
      "name": "about_me",
      "match": "how old|your age|what do you do|your job|for work|where (are you|do you live)|where you from",
      "reply": [
        "I'm {age}, I work as a {occupation} in {city}. What about you?",
        "I'm in {city}, working as a {occupation}. Where are you from?"
      ]
    },
    {
      "name": "greeting",
      "match": "^\\s*(hi|hello|hey|good (morning|evening|afternoon))\\b",
      "reply": [
        "Hi! How is your day going?",
        "Hey, nice to hear from you. How are you?"
      ]
    }
  ],
  "default": [
    "That's interesting, tell me more.",
    "Haha really? I've been spending a lot of time on {interest} lately.",
    "Sorry, busy day at work. How was yours?",
    "Oh nice. What do you like to do on weekends?"
  ]
})json";

}  // namespace

const nlohmann::json& PolicyStubBackend::default_table() {
  static const nlohmann::json table = nlohmann::json::parse(kDefaultTable);
  return table;
}

}  // namespace chatterbox::prompt
