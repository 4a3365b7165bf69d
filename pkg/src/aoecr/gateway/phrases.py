"""Canned patient/nurse language used by the oracle mock.

Request templates deliberately avoid degree phrases ("slightly", "a bit", ...)
and interrupt keywords ("stop", "halt"): those words change pipeline behavior
and are exercised by dedicated tests, not by generated corpora.
"""

from __future__ import annotations

# label -> reason -> variants
REQUEST_TEMPLATES: dict[str, dict[str, tuple[str, ...]]] = {
    "backrest_extend": {
        "direct_adjustment": (
            "Could you raise the backrest? I want to sit up now.",
            "Please help me sit up, raise the back of the bed.",
        ),
        "physical_discomfort": (
            "My back aches lying flat like this. I need to sit up more.",
            "Lying down this long hurts my back, please raise me so I can sit up.",
        ),
        "psychological_sensation": (
            "I feel uneasy lying so low. I'd rather sit up and see the room.",
            "It makes me anxious staring at the ceiling. Help me sit up, please.",
        ),
    },
    "backrest_retract": {
        "direct_adjustment": (
            "Please lower the backrest, I want to lie down flat.",
            "Could you put the back of the bed down for me?",
        ),
        "physical_discomfort": (
            "Sitting up this long is tiring me out. Lower the backrest so I can rest.",
            "My neck is getting stiff sitting like this. Please lay me back down.",
        ),
        "psychological_sensation": (
            "I feel worn out and just want to lie back and close my eyes.",
            "I'd feel calmer lying flat. Please bring the backrest down.",
        ),
    },
    "lift_extend": {
        "direct_adjustment": (
            "Can you raise the whole bed higher, please?",
            "Please bring the bed up, it is too low for me.",
        ),
        "physical_discomfort": (
            "It hurts to reach down this far. Raise the bed so the table is closer.",
            "My shoulders strain at this height, could you lift the bed up?",
        ),
        "psychological_sensation": (
            "I feel shut away down here. Please raise the bed so I can see out the window.",
            "Being so low makes me feel small. Bring the bed up, would you?",
        ),
    },
    "lift_retract": {
        "direct_adjustment": (
            "Please lower the whole bed down.",
            "Can you bring the bed closer to the floor?",
        ),
        "physical_discomfort": (
            "The bed is too high for me to get my feet down. Please lower it.",
            "I'm afraid of the drop when I sit on the edge. Bring the bed down, please.",
        ),
        "psychological_sensation": (
            "I feel wobbly up this high. I'd be happier with the bed lowered.",
            "Being up here makes me nervous. Could you let the bed down?",
        ),
    },
    "left_leg_extend": {
        "direct_adjustment": (
            "Please raise my left leg up.",
            "Could you lift the left leg rest for me?",
        ),
        "physical_discomfort": (
            "My left ankle is swelling again. Please prop that leg up.",
            "The left knee throbs when it lies flat. Raise my left leg, would you?",
        ),
        "psychological_sensation": (
            "I rest easier when my left leg is raised. Please bring it up.",
            "I feel restless with the left leg flat, could you raise it?",
        ),
    },
    "left_leg_retract": {
        "direct_adjustment": (
            "Please put my left leg back down.",
            "Could you lower the left leg rest now?",
        ),
        "physical_discomfort": (
            "My left hip is sore with the leg propped up. Lower it, please.",
            "The raised left leg is pulling on my knee. Please let it down.",
        ),
        "psychological_sensation": (
            "The raised left leg makes me feel pinned. Please bring it down.",
            "I would relax more with my left leg flat again.",
        ),
    },
    "right_leg_extend": {
        "direct_adjustment": (
            "Please raise my right leg for me.",
            "Could you bring the right leg rest up?",
        ),
        "physical_discomfort": (
            "My right calf cramps when it is flat. Please raise that leg.",
            "The right ankle is puffy today, prop the right leg up for me.",
        ),
        "psychological_sensation": (
            "I feel better with my right leg raised. Would you lift it?",
            "The right leg feels heavy lying flat. Please raise it.",
        ),
    },
    "right_leg_retract": {
        "direct_adjustment": (
            "Please lower my right leg back down.",
            "Could you put the right leg rest down now?",
        ),
        "physical_discomfort": (
            "Holding the right leg up is making it numb. Please lower it.",
            "My right knee wants straightening. Bring the right leg down, please.",
        ),
        "psychological_sensation": (
            "I'd feel settled with the right leg down again. Please lower it.",
            "The raised right leg keeps me on edge. Let it down, would you?",
        ),
    },
    "sit_up": {
        "direct_adjustment": (
            "Help me sit up properly, back raised and the bed brought up.",
            "I want to sit right up for lunch, raise the back and then the bed.",
        ),
        "physical_discomfort": (
            "I can't breathe well this flat. Sit me up and raise the bed some.",
            "My chest feels heavy lying down. Please sit me up.",
        ),
        "psychological_sensation": (
            "I feel brighter sitting up where I can see. Sit me up, please.",
            "Lying low gets me gloomy. Raise me so I'm sitting up.",
        ),
    },
    "lie_flat": {
        "direct_adjustment": (
            "Please lay the bed out flat so I can sleep.",
            "Put everything down flat for the night, would you?",
        ),
        "physical_discomfort": (
            "All these raised parts are making me ache. Lay me out flat, please.",
            "I need to rest my whole body. Please flatten the bed out.",
        ),
        "psychological_sensation": (
            "I just want to lie flat and settle down to sleep now.",
            "I'd feel calmer with the bed laid out flat, please.",
        ),
    },
    "raise_both_legs": {
        "direct_adjustment": (
            "Please raise both of my legs together.",
            "Could you bring both leg rests up for me?",
        ),
        "physical_discomfort": (
            "Both my feet are swollen tonight. Prop both legs up, please.",
            "My legs ache lying flat. Raise the two of them for me.",
        ),
        "psychological_sensation": (
            "I rest better with both legs up. Please raise them.",
            "I'd feel more settled with my legs raised together.",
        ),
    },
    "lower_both_legs": {
        "direct_adjustment": (
            "Please lower both of my legs back down.",
            "Put both leg rests down now, would you?",
        ),
        "physical_discomfort": (
            "My hips hurt with both legs raised. Lower them, please.",
            "Both knees want straightening. Bring my legs down together.",
        ),
        "psychological_sensation": (
            "I feel awkward with my legs in the air. Please bring both down.",
            "I'd be more at ease with both legs flat again.",
        ),
    },
    "leg_exercise": {
        "direct_adjustment": (
            "Could you run my leg exercises, moving each leg up and down a few times?",
            "Time for my leg movement routine, please cycle my legs for me.",
        ),
        "physical_discomfort": (
            "My legs are stiff from lying here. Move them up and down for me a few rounds.",
            "The nurse said to keep my legs moving. Please do the leg cycling routine.",
        ),
        "psychological_sensation": (
            "I feel sluggish today. Let's do the leg exercises to wake me up.",
            "Moving my legs always lifts my mood. Run the exercise cycle, please.",
        ),
    },
}

NURSE_RESPONSES: dict[str, tuple[str, ...]] = {
    "backrest_extend": (
        "Of course. I'm raising your backrest now so you can sit up comfortably.",
        "Right away. Bringing the backrest up for you.",
    ),
    "backrest_retract": (
        "Of course. Lowering the backrest now so you can lie back and rest.",
        "Sure. I'm letting the backrest down for you.",
    ),
    "lift_extend": (
        "Of course. Raising the bed up for you now.",
        "Sure thing. Bringing the whole bed higher.",
    ),
    "lift_retract": (
        "Of course. Lowering the bed down for you now.",
        "No problem. Bringing the bed closer to the floor.",
    ),
    "left_leg_extend": (
        "Of course. Raising your left leg now.",
        "Sure. Bringing the left leg rest up for you.",
    ),
    "left_leg_retract": (
        "Of course. Lowering your left leg back down now.",
        "Sure. Letting the left leg rest down gently.",
    ),
    "right_leg_extend": (
        "Of course. Raising your right leg now.",
        "Sure. Bringing the right leg rest up for you.",
    ),
    "right_leg_retract": (
        "Of course. Lowering your right leg back down now.",
        "Sure. Letting the right leg rest down gently.",
    ),
    "sit_up": (
        "Of course. Sitting you up now: backrest first, then I'll raise the bed.",
        "Right away. I'll bring the backrest up and then lift the bed so you're sitting well.",
    ),
    "lie_flat": (
        "Of course. I'll lay everything out flat so you can rest.",
        "Sure. Flattening the bed out for the night now.",
    ),
    "raise_both_legs": (
        "Of course. Raising both of your legs now.",
        "Sure. Bringing both leg rests up together.",
    ),
    "lower_both_legs": (
        "Of course. Lowering both legs back down now.",
        "Sure. Letting both leg rests down gently.",
    ),
    "leg_exercise": (
        "Of course. Starting your leg exercise cycle now, say the word and I'll end it.",
        "Right away. Running the leg movement routine for you.",
    ),
}

CLARIFY_QUESTIONS: tuple[str, ...] = (
    "I want to be sure I help the right way. Could you tell me which part of the bed you'd like me to adjust?",
    "I didn't quite catch that. Which adjustment would you like: the backrest, the height, or your legs?",
)

GENERIC_REQUEST = "Would you please adjust the bed for me? I need the {label} change."
GENERIC_RESPONSE = "Of course. I'm doing the {label} adjustment for you now."


def request_template(label: str, reason: str, pick: int) -> str:
    by_reason = REQUEST_TEMPLATES.get(label)
    if not by_reason:
        return GENERIC_REQUEST.format(label=label.replace("_", " "))
    variants = by_reason.get(reason) or next(iter(by_reason.values()))
    return variants[pick % len(variants)]


def nurse_response(label: str, pick: int) -> str:
    variants = NURSE_RESPONSES.get(label)
    if not variants:
        return GENERIC_RESPONSE.format(label=label.replace("_", " "))
    return variants[pick % len(variants)]


def clarify_question(pick: int) -> str:
    return CLARIFY_QUESTIONS[pick % len(CLARIFY_QUESTIONS)]
