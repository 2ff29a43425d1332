package track;

public final class Util {
    private Util() {
    }

    public static String mask(String value) {
        if (value == null || value.length() < 4) {
            return "****";
        }
        return value.substring(0, 2) + "**" + value.substring(value.length() - 2);
    }

    public static boolean validName(String name) {
        return name != null && name.matches("[a-zA-Z0-9_.-]{1,64}");
    }

    public static int boundedParse(String raw, int fallback) {
        try {
            int parsed = Integer.parseInt(raw);
            return Math.max(0, Math.min(parsed, 10_000));
        } catch (NumberFormatException e) {
            return fallback;
        }
    }
}
