import java.util.Map;

public class Mirrored {
    public boolean check(Map<String, Integer> map) {
        boolean empty = 0 == map.size(); // expect: S1155
        boolean full = 0 < map.size(); // expect: S1155
        boolean none = 1 > map.size(); // expect: S1155
        return empty || full || none;
    }
}
